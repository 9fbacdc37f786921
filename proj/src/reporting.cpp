#include "histpt/reporting.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "histpt/errors.hpp"
#include "histpt/metrics.hpp"

namespace histpt {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::string fixed2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  return out;
}

std::string correct_bits(const std::vector<std::uint8_t>& correct) {
  std::string bits(correct.size(), '0');
  for (std::size_t i = 0; i < correct.size(); ++i) {
    if (correct[i]) bits[i] = '1';
  }
  return bits;
}

ordered_json config_json(const ExperimentConfig& config) {
  ordered_json j;
  j["stream"] = {{"classes", config.stream.num_classes},
                 {"feature_dim", config.stream.feature_dim},
                 {"samples_per_domain", config.stream.samples_per_domain},
                 {"domains", config.stream.domains.size()},
                 {"runs", config.stream.runs},
                 {"seed", config.stream.seed}};
  if (config.fixed_order) {
    j["stream"]["order"] = *config.fixed_order;
  } else {
    j["stream"]["order"] = "shuffled";
  }
  j["tuner"] = {{"lr", config.tuner.learning_rate},
                {"weight_decay", config.tuner.weight_decay},
                {"opt_steps", config.tuner.opt_steps},
                {"tokens", config.tuner.num_tokens},
                {"dim", config.tuner.token_dim},
                {"local_size", config.tuner.local_size},
                {"hard_size", config.tuner.hard_size},
                {"hard_k", config.tuner.hard_k},
                {"gamma", config.tuner.gamma},
                {"tau", config.tuner.tau}};
  j["window"] = config.window;
  j["window_definition"] = "trailing mean over the last min(window, n) samples";
  return j;
}

ordered_json flags_json(const RetrievalOptions& flags) {
  return {{"local", flags.use_local},
          {"hard", flags.use_hard},
          {"global", flags.use_global},
          {"adaptive", flags.adaptive_weights}};
}

}  // namespace

std::string flags_label(const MethodSpec& method) {
  if (method.kind != MethodKind::histpt) return "-";
  std::string label;
  const auto append = [&](bool on, const char* name) {
    if (!on) return;
    if (!label.empty()) label += '+';
    label += name;
  };
  append(method.flags.use_local, "local");
  append(method.flags.use_hard, "hard");
  append(method.flags.use_global, "global");
  append(method.flags.adaptive_weights, "adaptive");
  return label.empty() ? "none" : label;
}

void write_metrics_csv(const std::string& path, const ExperimentConfig& config,
                       const ExperimentSummary& summary) {
  std::set<int> domains;
  for (const RunResult& r : summary.runs) {
    for (const auto& [d, acc] : r.metrics.per_domain_accuracy) domains.insert(d);
  }

  auto out = open_out(path);
  out << "seed,method,flags,run,mean_accuracy";
  for (int d : domains) out << ",domain_" << d;
  out << '\n';
  for (const RunResult& r : summary.runs) {
    out << config.stream.seed << ',' << method_name(config.method.kind) << ','
        << flags_label(config.method) << ',' << r.run_index << ','
        << fixed6(r.metrics.mean_accuracy);
    for (int d : domains) {
      auto it = r.metrics.per_domain_accuracy.find(d);
      out << ',' << (it == r.metrics.per_domain_accuracy.end() ? std::string()
                                                               : fixed6(it->second));
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path);
}

void write_metrics_json(const std::string& path, const ExperimentConfig& config,
                        const ExperimentSummary& summary) {
  ordered_json doc;
  doc["schema"] = "histpt-metrics-v1";
  doc["method"] = method_name(config.method.kind);
  doc["flags"] = flags_json(config.method.flags);
  doc["config"] = config_json(config);

  ordered_json per_domain;
  for (const auto& [d, acc] : summary.per_domain_mean) {
    per_domain[std::to_string(d)] = acc;
  }
  doc["summary"] = {{"runs", summary.runs.size()},
                    {"mean_accuracy", summary.mean_accuracy},
                    {"std_accuracy", summary.std_accuracy},
                    {"per_domain", per_domain},
                    {"trailing_window_accuracy", summary.mean_windowed}};

  auto& per_run = doc["per_run"] = ordered_json::array();
  for (const RunResult& r : summary.runs) {
    ordered_json run;
    run["run"] = r.run_index;
    run["mean_accuracy"] = r.metrics.mean_accuracy;
    ordered_json run_domains;
    for (const auto& [d, acc] : r.metrics.per_domain_accuracy) {
      run_domains[std::to_string(d)] = acc;
    }
    run["per_domain"] = run_domains;
    run["correct"] = correct_bits(r.metrics.per_sample_correct);
    if (r.error) run["error"] = *r.error;
    per_run.push_back(std::move(run));
  }

  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path);
}

void write_trace_jsonl(const std::string& path, const ExperimentSummary& summary) {
  auto out = open_out(path);
  for (const RunResult& r : summary.runs) {
    for (const SampleRecord& rec : r.trace) {
      ordered_json row;
      row["run"] = rec.run;
      row["sample"] = rec.sample;
      row["domain"] = rec.domain;
      row["true_class"] = rec.true_class;
      row["predicted"] = rec.predicted;
      row["correct"] = rec.correct;
      row["raw_entropy"] = rec.raw_entropy;
      row["fused_entropy"] = rec.fused_entropy;
      row["sources"] = rec.sources;
      row["weights"] = rec.weights;
      out << row.dump() << '\n';
    }
  }
  if (!out) throw ConfigError("write failed for " + path);
}

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
  auto out = open_out(path);
  out << "local,hard,global,adaptive,label,mean_accuracy,std_accuracy\n";
  for (const AblationRow& row : rows) {
    out << (row.flags.use_local ? 1 : 0) << ',' << (row.flags.use_hard ? 1 : 0) << ','
        << (row.flags.use_global ? 1 : 0) << ',' << (row.flags.adaptive_weights ? 1 : 0)
        << ',' << row.label << ',' << fixed6(row.mean_accuracy) << ','
        << fixed6(row.std_accuracy) << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path);
}

void write_ablation_json(const std::string& path, const ExperimentConfig& config,
                         const std::vector<AblationRow>& rows) {
  ordered_json doc;
  doc["schema"] = "histpt-ablation-v1";
  doc["config"] = config_json(config);
  auto& out_rows = doc["rows"] = ordered_json::array();
  for (const AblationRow& row : rows) {
    out_rows.push_back({{"label", row.label},
                        {"flags", flags_json(row.flags)},
                        {"mean_accuracy", row.mean_accuracy},
                        {"std_accuracy", row.std_accuracy}});
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path);
}

void write_sweep_csv(const std::string& path,
                     const std::vector<std::pair<int, double>>& sweep) {
  auto out = open_out(path);
  out << "opt_steps,mean_accuracy\n";
  for (const auto& [steps, acc] : sweep) {
    out << steps << ',' << fixed6(acc) << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path);
}

void write_sweep_json(const std::string& path, const ExperimentConfig& config,
                      const std::vector<std::pair<int, double>>& sweep) {
  ordered_json doc;
  doc["schema"] = "histpt-sweep-v1";
  doc["config"] = config_json(config);
  auto& rows = doc["rows"] = ordered_json::array();
  for (const auto& [steps, acc] : sweep) {
    rows.push_back({{"opt_steps", steps}, {"mean_accuracy", acc}});
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path);
}

MetricsFile load_metrics_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.contains("schema") || doc["schema"] != "histpt-metrics-v1") {
    throw ParseError(path + ": not a histpt-metrics-v1 file");
  }

  MetricsFile file;
  file.path = path;
  try {
    file.method = doc.at("method").get<std::string>();
    file.seed = doc.at("config").at("stream").at("seed").get<std::uint64_t>();
    file.window = doc.at("config").at("window").get<std::size_t>();
    const auto& summary = doc.at("summary");
    file.mean_accuracy = summary.at("mean_accuracy").get<double>();
    file.std_accuracy = summary.at("std_accuracy").get<double>();
    for (const auto& [key, value] : summary.at("per_domain").items()) {
      file.per_domain[std::stoi(key)] = value.get<double>();
    }
    file.mean_windowed = summary.at("trailing_window_accuracy").get<std::vector<double>>();
    for (const auto& run : doc.at("per_run")) {
      file.run_means.push_back(run.at("mean_accuracy").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return file;
}

std::string format_signed_delta(double delta_points) {
  double rounded = std::round(delta_points * 10.0) / 10.0;
  if (rounded == 0.0) rounded = 0.0;  // normalize -0.0
  char buf[32];
  std::snprintf(buf, sizeof(buf), "(%+.1f)", rounded);
  return buf;
}

std::string format_report(const std::vector<MetricsFile>& files) {
  if (files.empty()) throw UsageError("report: no metrics files");

  const MetricsFile* baseline = nullptr;
  for (const MetricsFile& f : files) {
    if (f.method == "zero-shot") {
      baseline = &f;
      break;
    }
  }

  std::ostringstream out;
  for (const MetricsFile& f : files) {
    const double mu = mean(f.run_means) * 100.0;
    const double sd = sample_std(f.run_means) * 100.0;
    out << f.method << " (" << f.path << ")\n";
    out << "  runs: " << f.run_means.size() << "\n";
    out << "  mean accuracy: " << fixed2(mu) << " +/- " << fixed2(sd) << "\n";
    out << "  per-domain:";
    for (const auto& [domain, acc] : f.per_domain) {
      out << "  " << domain << ": " << fixed2(acc * 100.0);
      if (baseline) {
        auto it = baseline->per_domain.find(domain);
        if (it != baseline->per_domain.end()) {
          out << ' ' << format_signed_delta((acc - it->second) * 100.0);
        }
      }
    }
    out << "\n";
  }
  if (baseline) {
    out << "deltas are vs zero-shot (" << baseline->path << ")\n";
  } else {
    out << "no zero-shot file given; per-domain deltas omitted\n";
  }
  return out.str();
}

void write_curves_csv(const std::string& path, const std::vector<MetricsFile>& files) {
  if (files.empty()) throw UsageError("report: no metrics files");
  std::size_t len = 0;
  for (const MetricsFile& f : files) len = std::max(len, f.mean_windowed.size());

  auto out = open_out(path);
  out << "sample";
  for (const MetricsFile& f : files) out << ',' << f.method << "_trailing_acc";
  out << '\n';
  for (std::size_t i = 0; i < len; ++i) {
    out << i;
    for (const MetricsFile& f : files) {
      out << ',';
      if (i < f.mean_windowed.size()) out << fixed6(f.mean_windowed[i]);
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace histpt
