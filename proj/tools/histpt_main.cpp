#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "histpt/checkpoint.hpp"
#include "histpt/embedding_io.hpp"
#include "histpt/errors.hpp"
#include "histpt/experiment.hpp"
#include "histpt/reporting.hpp"
#include "histpt/tuner.hpp"

namespace {

using namespace histpt;

struct Opts {
  std::string method = "histpt";
  std::uint64_t seed = 42;
  std::size_t runs = 100;
  std::size_t local_size = 32;
  std::size_t hard_size = 32;
  std::size_t hard_k = 16;
  double gamma = 0.99;
  double tau = 0.01;
  double lr = 0.005;
  double weight_decay = 0.01;
  int opt_steps = 1;
  std::size_t tokens = 4;
  std::size_t dim = 512;
  bool no_local = false;
  bool no_hard = false;
  bool no_global = false;
  bool no_adaptive = false;
  std::string init_tokens;
  std::string embeddings;
  std::string trace;
  std::string out;

  std::size_t classes = 10;
  std::size_t feature_dim = 32;
  std::size_t samples_per_domain = 200;
  std::string order;
  std::size_t window = 50;
  std::size_t run_index = 0;

  std::size_t checkpoint_at = 0;
  std::string checkpoint_out;
  std::string resume_from;

  std::string steps = "1,2,3,4,5,6,7,8,9,10";
  std::size_t trials = 120;
  double tolerance = 1e-4;

  std::vector<std::string> report_files;
};

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": '" + item + "' is not an integer");
    }
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  return values;
}

std::string out_stem(const std::string& out) {
  for (const char* ext : {".csv", ".json"}) {
    const std::size_t n = std::string(ext).size();
    if (out.size() > n && out.compare(out.size() - n, n, ext) == 0) {
      return out.substr(0, out.size() - n);
    }
  }
  return out;
}

void add_stream_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--seed", o.seed, "Master seed for every random draw");
  cmd->add_option("--classes", o.classes, "Number of classes in the synthetic stream");
  cmd->add_option("--feature-dim", o.feature_dim, "Image-feature dimension");
  cmd->add_option("--samples-per-domain", o.samples_per_domain,
                  "Samples emitted per domain block");
  cmd->add_option("--order", o.order,
                  "Fixed comma-separated domain order (default: shuffled per run)");
}

void add_tuner_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--local-size", o.local_size, "Local bank capacity");
  cmd->add_option("--hard-size", o.hard_size, "Hard-sample bank capacity");
  cmd->add_option("--hard-k", o.hard_k, "Hard-sample selection count");
  cmd->add_option("--gamma", o.gamma, "Global-bank momentum coefficient");
  cmd->add_option("--tau", o.tau, "Softmax temperature");
  cmd->add_option("--lr", o.lr, "Learning rate");
  cmd->add_option("--weight-decay", o.weight_decay, "Decoupled weight decay");
  cmd->add_option("--opt-steps", o.opt_steps, "Optimizer steps per sample");
  cmd->add_option("--tokens", o.tokens, "Number of learnable prompt tokens");
  cmd->add_option("--dim", o.dim, "Prompt token dimension");
  cmd->add_option("--init-tokens", o.init_tokens, "Load initial tokens from file");
}

void add_method_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--method", o.method, "zero-shot, tpt, or histpt")
      ->check(CLI::IsMember({"zero-shot", "tpt", "histpt"}));
  cmd->add_flag("--no-local", o.no_local, "Disable the local bank source");
  cmd->add_flag("--no-hard", o.no_hard, "Disable the hard-sample bank source");
  cmd->add_flag("--no-global", o.no_global, "Disable the global bank source");
  cmd->add_flag("--no-adaptive", o.no_adaptive,
                "Use uniform fusion weights instead of entropy-adaptive ones");
}

void add_output_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--out", o.out, "Output stem; writes <stem>.csv and <stem>.json");
  cmd->add_option("--trace", o.trace, "Write per-sample JSON-lines trace here");
  cmd->add_option("--window", o.window, "Trailing accuracy window size");
}

ExperimentConfig build_config(const Opts& o) {
  ExperimentConfig cfg;
  cfg.stream.num_classes = o.classes;
  cfg.stream.feature_dim = o.feature_dim;
  cfg.stream.samples_per_domain = o.samples_per_domain;
  cfg.stream.runs = o.runs;
  cfg.stream.seed = o.seed;
  cfg.tuner.learning_rate = o.lr;
  cfg.tuner.weight_decay = o.weight_decay;
  cfg.tuner.opt_steps = o.opt_steps;
  cfg.tuner.num_tokens = o.tokens;
  cfg.tuner.token_dim = o.dim;
  cfg.tuner.local_size = o.local_size;
  cfg.tuner.hard_size = o.hard_size;
  cfg.tuner.hard_k = o.hard_k;
  cfg.tuner.gamma = o.gamma;
  cfg.tuner.tau = o.tau;
  cfg.method.kind = parse_method(o.method);
  cfg.method.flags = {!o.no_local, !o.no_hard, !o.no_global, !o.no_adaptive};
  cfg.window = o.window;
  cfg.keep_trace = !o.trace.empty();
  if (!o.order.empty()) cfg.fixed_order = parse_int_list(o.order, "--order");
  return cfg;
}

std::optional<Matrix> maybe_load_tokens(const Opts& o) {
  if (o.init_tokens.empty()) return std::nullopt;
  return load_tokens(o.init_tokens);
}

int finish_experiment(const Opts& o, const ExperimentConfig& cfg,
                      const ExperimentSummary& summary) {
  if (!o.out.empty()) {
    const std::string stem = out_stem(o.out);
    write_metrics_csv(stem + ".csv", cfg, summary);
    write_metrics_json(stem + ".json", cfg, summary);
  }
  if (!o.trace.empty()) write_trace_jsonl(o.trace, summary);

  char line[160];
  std::snprintf(line, sizeof(line),
                "%s: mean accuracy %.2f%% +/- %.2f over %zu run(s)",
                method_name(cfg.method.kind).c_str(), summary.mean_accuracy * 100.0,
                summary.std_accuracy * 100.0, summary.runs.size());
  std::cout << line << '\n';

  int rc = 0;
  for (const RunResult& r : summary.runs) {
    if (r.error) {
      std::cerr << "run " << r.run_index << " aborted: " << *r.error << '\n';
      rc = 1;
    }
  }
  return rc;
}

int cmd_run(const Opts& o) {
  ExperimentConfig cfg = build_config(o);
  const std::optional<Matrix> init_tokens = maybe_load_tokens(o);

  if (!o.embeddings.empty()) {
    EmbeddingStream loaded = load_embedding_stream(o.embeddings);
    if (loaded.samples.empty()) {
      throw ConfigError(o.embeddings + ": no records to run on");
    }
    if (loaded.num_classes < 2) {
      throw ConfigError(o.embeddings + ": needs at least 2 classes");
    }
    if (cfg.stream.runs != 1) {
      std::cerr << "note: a loaded embedding stream is fixed; running 1 run\n";
      cfg.stream.runs = 1;
    }
    cfg.stream.num_classes = loaded.num_classes;
    cfg.stream.feature_dim = loaded.feature_dim;
    const Workbench bench = make_workbench(cfg.stream, cfg.tuner, init_tokens);
    return finish_experiment(o, cfg,
                             run_on_streams(cfg, bench, {std::move(loaded.samples)}));
  }

  cfg.stream.domains = default_domain_specs(cfg.stream.feature_dim, cfg.stream.seed);
  const Workbench bench = make_workbench(cfg.stream, cfg.tuner, init_tokens);

  const bool wants_checkpoint = o.checkpoint_at > 0 || !o.resume_from.empty();
  if (!wants_checkpoint) {
    return finish_experiment(o, cfg, run_many(cfg, bench));
  }

  if (cfg.stream.runs != 1) {
    throw ConfigError("checkpointing works on single runs; pass --runs 1");
  }
  std::size_t run_index = 0;
  std::optional<ResumePoint> resume;
  if (!o.resume_from.empty()) {
    const RunCheckpoint cp = load_checkpoint(o.resume_from);
    run_index = cp.run_index;
    resume = resume_from_checkpoint(cp, cfg);
  }
  const std::vector<StreamSample> stream =
      cfg.fixed_order
          ? fixed_order_stream(cfg.stream, bench.prototypes, *cfg.fixed_order, run_index)
          : generate_stream(cfg.stream, bench.prototypes, run_index);

  CheckpointRequest request;
  if (o.checkpoint_at > 0) {
    if (o.checkpoint_out.empty()) {
      throw UsageError("--checkpoint-at needs --checkpoint-out <file>");
    }
    request.after_samples = o.checkpoint_at;
    request.sink = [&](const ResumePoint& point) {
      save_checkpoint(o.checkpoint_out, make_checkpoint(cfg, run_index, point));
    };
  }
  RunResult result =
      run_single(cfg, bench, stream, run_index, resume ? &*resume : nullptr,
                 o.checkpoint_at > 0 ? &request : nullptr);
  std::vector<RunResult> results;
  results.push_back(std::move(result));
  return finish_experiment(o, cfg, summarize(std::move(results)));
}

int cmd_ablate(const Opts& o) {
  ExperimentConfig cfg = build_config(o);
  cfg.method.kind = MethodKind::histpt;
  cfg.stream.domains = default_domain_specs(cfg.stream.feature_dim, cfg.stream.seed);
  const Workbench bench = make_workbench(cfg.stream, cfg.tuner, maybe_load_tokens(o));

  const std::vector<AblationRow> rows = run_ablation(cfg, bench);
  if (!o.out.empty()) {
    const std::string stem = out_stem(o.out);
    write_ablation_csv(stem + ".csv", rows);
    write_ablation_json(stem + ".json", cfg, rows);
  }
  for (const AblationRow& row : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-28s %7.2f%% +/- %.2f", row.label.c_str(),
                  row.mean_accuracy * 100.0, row.std_accuracy * 100.0);
    std::cout << line << '\n';
  }
  return 0;
}

int cmd_sweep(const Opts& o) {
  ExperimentConfig cfg = build_config(o);
  cfg.method.kind = parse_method(o.method);
  cfg.stream.domains = default_domain_specs(cfg.stream.feature_dim, cfg.stream.seed);
  const Workbench bench = make_workbench(cfg.stream, cfg.tuner, maybe_load_tokens(o));

  const std::vector<int> steps = parse_int_list(o.steps, "--steps");
  const auto sweep = run_step_sweep(cfg, bench, steps);
  if (!o.out.empty()) {
    const std::string stem = out_stem(o.out);
    write_sweep_csv(stem + ".csv", sweep);
    write_sweep_json(stem + ".json", cfg, sweep);
  }
  for (const auto& [s, acc] : sweep) {
    char line[80];
    std::snprintf(line, sizeof(line), "opt_steps=%-3d %7.2f%%", s, acc * 100.0);
    std::cout << line << '\n';
  }
  return 0;
}

int cmd_gradcheck(const Opts& o) {
  const GradCheckReport report = run_gradient_check(o.seed, o.trials, o.tolerance);
  char line[160];
  std::snprintf(line, sizeof(line),
                "gradcheck: %zu configs x 2 losses, max rel err %.3e, tolerance %.1e: %s",
                report.trials, report.max_rel_err, o.tolerance,
                report.passed() ? "PASS" : "FAIL");
  std::cout << line << '\n';
  return report.passed() ? 0 : 1;
}

int cmd_report(const Opts& o) {
  std::vector<MetricsFile> files;
  files.reserve(o.report_files.size());
  for (const std::string& path : o.report_files) {
    files.push_back(load_metrics_json(path));
  }
  std::cout << format_report(files);
  if (!o.out.empty()) write_curves_csv(o.out, files);
  return 0;
}

int cmd_gen_stream(const Opts& o) {
  if (o.out.empty()) throw UsageError("gen-stream needs --out <file>");
  ExperimentConfig cfg = build_config(o);
  cfg.stream.domains = default_domain_specs(cfg.stream.feature_dim, cfg.stream.seed);
  const Matrix prototypes = generate_class_prototypes(
      cfg.stream.num_classes, cfg.stream.feature_dim, cfg.stream.seed);
  const std::vector<StreamSample> stream =
      cfg.fixed_order
          ? fixed_order_stream(cfg.stream, prototypes, *cfg.fixed_order, o.run_index)
          : generate_stream(cfg.stream, prototypes, o.run_index);

  const std::string& path = o.out;
  const bool jsonl = path.size() > 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0;
  if (jsonl) {
    write_embeddings_jsonl(path, static_cast<std::uint32_t>(cfg.stream.feature_dim),
                           stream);
  } else {
    write_embeddings_binary(path, static_cast<std::uint32_t>(cfg.stream.num_classes),
                            static_cast<std::uint32_t>(cfg.stream.feature_dim), stream);
  }
  std::cout << "wrote " << stream.size() << " samples (" << cfg.stream.num_classes
            << " classes, dim " << cfg.stream.feature_dim << ") to " << path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online test-time prompt tuning with historical knowledge banks"};
  app.require_subcommand(1);
  Opts o;
  int rc = 0;

  CLI::App* run = app.add_subcommand("run", "Run an online adaptation experiment");
  run->set_config("--config");
  add_stream_options(run, o);
  run->add_option("--runs", o.runs, "Independent shuffled runs");
  add_tuner_options(run, o);
  add_method_options(run, o);
  add_output_options(run, o);
  run->add_option("--embeddings", o.embeddings,
                  "Run on a precomputed embedding file instead of synthetic data");
  run->add_option("--checkpoint-at", o.checkpoint_at,
                  "Write a checkpoint after this many samples (needs --runs 1)");
  run->add_option("--checkpoint-out", o.checkpoint_out, "Checkpoint file to write");
  run->add_option("--resume-from", o.resume_from, "Resume a run from a checkpoint");
  run->callback([&]() { rc = cmd_run(o); });

  CLI::App* ablate = app.add_subcommand("ablate", "Bank-combination ablation matrix");
  ablate->set_config("--config");
  add_stream_options(ablate, o);
  ablate->add_option("--runs", o.runs, "Independent shuffled runs per row");
  add_tuner_options(ablate, o);
  add_output_options(ablate, o);
  ablate->callback([&]() { rc = cmd_ablate(o); });

  CLI::App* sweep = app.add_subcommand("sweep-steps",
                                       "Accuracy vs optimizer steps per sample");
  sweep->set_config("--config");
  add_stream_options(sweep, o);
  sweep->add_option("--runs", o.runs, "Independent shuffled runs per step count");
  add_tuner_options(sweep, o);
  add_method_options(sweep, o);
  add_output_options(sweep, o);
  sweep->add_option("--steps", o.steps, "Comma-separated optimizer step counts");
  sweep->callback([&]() { rc = cmd_sweep(o); });

  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Verify analytic gradients against finite differences");
  gradcheck->add_option("--seed", o.seed, "Seed for the random configurations");
  gradcheck->add_option("--trials", o.trials, "Number of random configurations");
  gradcheck->add_option("--tolerance", o.tolerance, "Relative-error tolerance");
  gradcheck->callback([&]() { rc = cmd_gradcheck(o); });

  CLI::App* report = app.add_subcommand("report", "Summarize metrics JSON files");
  report->add_option("files", o.report_files, "Metrics JSON files")
      ->required()
      ->expected(-1);
  report->add_option("--out", o.out, "Write per-sample accuracy curves CSV here");
  report->callback([&]() { rc = cmd_report(o); });

  CLI::App* gen = app.add_subcommand("gen-stream",
                                     "Generate a synthetic stream embedding file");
  gen->set_config("--config");
  add_stream_options(gen, o);
  gen->add_option("--run-index", o.run_index, "Which run's shuffle to emit");
  gen->add_option("--out", o.out, "Output file (.jsonl for JSON lines, else binary)");
  gen->callback([&]() { rc = cmd_gen_stream(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const histpt::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const histpt::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const histpt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
