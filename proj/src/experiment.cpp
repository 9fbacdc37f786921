#include "histpt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "histpt/core_math.hpp"
#include "histpt/errors.hpp"

namespace histpt {

std::string method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::zero_shot: return "zero-shot";
    case MethodKind::tpt_baseline: return "tpt";
    case MethodKind::histpt: return "histpt";
  }
  throw UsageError("unknown method kind");
}

MethodKind parse_method(const std::string& name) {
  if (name == "zero-shot") return MethodKind::zero_shot;
  if (name == "tpt") return MethodKind::tpt_baseline;
  if (name == "histpt") return MethodKind::histpt;
  throw UsageError("unknown method '" + name +
                   "' (expected zero-shot, tpt, or histpt)");
}

Workbench make_workbench(const StreamConfig& stream, const TunerConfig& tuner,
                         const std::optional<Matrix>& initial_tokens) {
  Workbench bench;
  bench.prototypes =
      generate_class_prototypes(stream.num_classes, stream.feature_dim, stream.seed);
  ToyEncoder encoder =
      make_toy_encoder(stream.feature_dim, tuner.token_dim, stream.seed);
  ClassVocabulary vocab = vocabulary_from_prototypes(encoder.w_text, bench.prototypes);
  bench.ctx = make_encoding_context(std::move(encoder), std::move(vocab));

  if (initial_tokens) {
    if (initial_tokens->rows() != tuner.num_tokens ||
        initial_tokens->cols() != tuner.token_dim) {
      throw ConfigError("initial tokens are " + std::to_string(initial_tokens->rows()) +
                        "x" + std::to_string(initial_tokens->cols()) +
                        " but the config wants " + std::to_string(tuner.num_tokens) +
                        "x" + std::to_string(tuner.token_dim));
    }
    bench.initial_state.tokens = *initial_tokens;
    bench.initial_state.m1 = Matrix(tuner.num_tokens, tuner.token_dim);
    bench.initial_state.m2 = Matrix(tuner.num_tokens, tuner.token_dim);
  } else {
    bench.initial_state =
        init_prompt_state(tuner.num_tokens, tuner.token_dim, stream.seed);
  }
  return bench;
}

namespace {

SampleRecord make_record(std::size_t run, const StreamSample& s, const Vec& raw,
                         const Vec& fused, std::vector<std::string> sources,
                         Vec weights) {
  SampleRecord rec;
  rec.run = run;
  rec.sample = s.index;
  rec.domain = s.domain_id;
  rec.true_class = s.true_class;
  rec.predicted = argmax_class(fused);
  rec.correct = rec.predicted == static_cast<std::size_t>(s.true_class);
  rec.raw_entropy = prediction_entropy(raw);
  rec.fused_entropy = prediction_entropy(fused);
  rec.sources = std::move(sources);
  rec.weights = std::move(weights);
  return rec;
}

}  // namespace

RunResult run_single(const ExperimentConfig& config, const Workbench& bench,
                     const std::vector<StreamSample>& stream, std::size_t run_index,
                     const ResumePoint* resume, const CheckpointRequest* checkpoint) {
  if (stream.empty()) throw UsageError("experiment: empty stream");

  RunResult result;
  result.run_index = run_index;

  PromptState state = resume ? resume->state : bench.initial_state;
  KnowledgeBanks banks =
      resume ? resume->banks
             : KnowledgeBanks(config.tuner.local_size, config.tuner.hard_size,
                              config.tuner.hard_k, config.tuner.gamma);
  std::vector<SampleRecord> records = resume ? resume->records
                                             : std::vector<SampleRecord>{};
  const std::size_t start = resume ? resume->next_sample : 0;
  if (start > stream.size() || records.size() != start) {
    throw ConfigError("experiment: resume point does not fit the stream");
  }

  for (std::size_t i = start; i < stream.size(); ++i) {
    const StreamSample& s = stream[i];
    try {
      switch (config.method.kind) {
        case MethodKind::zero_shot: {
          Vec p = zero_shot_predict(state, s, bench.ctx, config.tuner);
          records.push_back(make_record(run_index, s, p, p, {}, {}));
          break;
        }
        case MethodKind::tpt_baseline: {
          Vec p = tpt_baseline_step(state, s, bench.ctx, config.tuner);
          records.push_back(make_record(run_index, s, p, p, {}, {}));
          break;
        }
        case MethodKind::histpt: {
          PredictionBundle b = tune_step(state, banks, s, bench.ctx, config.tuner,
                                         config.method.flags);
          records.push_back(make_record(run_index, s, b.raw, b.fused,
                                        std::move(b.sources), std::move(b.weights)));
          break;
        }
      }
    } catch (const std::exception& e) {
      result.error = e.what();
      break;
    }
    if (checkpoint && checkpoint->sink && records.size() == checkpoint->after_samples) {
      checkpoint->sink(ResumePoint{state, banks, records, i + 1});
    }
  }

  std::vector<std::uint8_t> correct;
  std::vector<int> domains;
  correct.reserve(records.size());
  domains.reserve(records.size());
  for (const SampleRecord& r : records) {
    correct.push_back(r.correct ? 1 : 0);
    domains.push_back(r.domain);
  }
  result.metrics = compute_metrics(std::move(correct), domains, config.window);
  if (config.keep_trace) result.trace = std::move(records);
  return result;
}

ExperimentSummary summarize(std::vector<RunResult> runs) {
  ExperimentSummary summary;
  std::vector<double> means;
  means.reserve(runs.size());
  for (const RunResult& r : runs) means.push_back(r.metrics.mean_accuracy);
  summary.mean_accuracy = mean(means);
  summary.std_accuracy = sample_std(means);

  std::map<int, std::vector<double>> per_domain;
  for (const RunResult& r : runs) {
    for (const auto& [domain, acc] : r.metrics.per_domain_accuracy) {
      per_domain[domain].push_back(acc);
    }
  }
  for (const auto& [domain, values] : per_domain) {
    summary.per_domain_mean[domain] = mean(values);
  }

  std::size_t curve_len = 0;
  for (const RunResult& r : runs) {
    if (r.metrics.windowed_accuracy.empty()) continue;
    curve_len = curve_len == 0 ? r.metrics.windowed_accuracy.size()
                               : std::min(curve_len, r.metrics.windowed_accuracy.size());
  }
  summary.mean_windowed.resize(curve_len, 0.0);
  if (curve_len > 0) {
    std::size_t contributing = 0;
    for (const RunResult& r : runs) {
      if (r.metrics.windowed_accuracy.empty()) continue;
      ++contributing;
      for (std::size_t i = 0; i < curve_len; ++i) {
        summary.mean_windowed[i] += r.metrics.windowed_accuracy[i];
      }
    }
    for (double& x : summary.mean_windowed) x /= static_cast<double>(contributing);
  }

  summary.runs = std::move(runs);
  return summary;
}

namespace {

ExperimentSummary run_pool(std::size_t total,
                           const std::function<RunResult(std::size_t)>& one_run) {
  std::vector<RunResult> results(total);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        results[i] = one_run(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const std::size_t jobs =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), total);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return summarize(std::move(results));
}

}  // namespace

ExperimentSummary run_many(const ExperimentConfig& config, const Workbench& bench) {
  if (config.stream.runs == 0) throw ConfigError("experiment: runs must be >= 1");
  return run_pool(config.stream.runs, [&](std::size_t i) {
    const std::vector<StreamSample> stream =
        config.fixed_order
            ? fixed_order_stream(config.stream, bench.prototypes, *config.fixed_order, i)
            : generate_stream(config.stream, bench.prototypes, i);
    return run_single(config, bench, stream, i);
  });
}

ExperimentSummary run_on_streams(const ExperimentConfig& config,
                                 const Workbench& bench,
                                 const std::vector<std::vector<StreamSample>>& streams) {
  if (streams.empty()) throw UsageError("experiment: no streams given");
  return run_pool(streams.size(), [&](std::size_t i) {
    return run_single(config, bench, streams[i], i);
  });
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base,
                                      const Workbench& bench) {
  struct RowSpec {
    const char* label;
    bool local, hard, global, adaptive;
  };
  constexpr RowSpec kRows[] = {
      {"none", false, false, false, false},
      {"local", true, false, false, false},
      {"hard", false, true, false, false},
      {"global", false, false, true, false},
      {"local+hard", true, true, false, false},
      {"local+global", true, false, true, false},
      {"hard+global", false, true, true, false},
      {"local+hard+global", true, true, true, false},
      {"local+hard+global+adaptive", true, true, true, true},
  };

  std::vector<AblationRow> rows;
  rows.reserve(std::size(kRows));
  for (const RowSpec& spec : kRows) {
    ExperimentConfig config = base;
    config.method.kind = MethodKind::histpt;
    config.method.flags = {spec.local, spec.hard, spec.global, spec.adaptive};
    config.keep_trace = false;
    const ExperimentSummary summary = run_many(config, bench);
    rows.push_back({spec.label, config.method.flags, summary.mean_accuracy,
                    summary.std_accuracy});
  }
  return rows;
}

std::vector<std::pair<int, double>> run_step_sweep(const ExperimentConfig& base,
                                                   const Workbench& bench,
                                                   const std::vector<int>& steps) {
  if (steps.empty()) throw UsageError("sweep: need at least one step count");
  std::vector<std::pair<int, double>> out;
  out.reserve(steps.size());
  for (int s : steps) {
    if (s < 1) throw ConfigError("sweep: step counts must be >= 1");
    ExperimentConfig config = base;
    config.tuner.opt_steps = s;
    config.keep_trace = false;
    out.emplace_back(s, run_many(config, bench).mean_accuracy);
  }
  return out;
}

}  // namespace histpt
