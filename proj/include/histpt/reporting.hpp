#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "histpt/experiment.hpp"

namespace histpt {

/// All writers emit deterministic bytes: fixed key/column order, fixed float
/// formatting, no timestamps. Windowed-accuracy series use a trailing window
/// and are labeled as such in headers.

void write_metrics_csv(const std::string& path, const ExperimentConfig& config,
                       const ExperimentSummary& summary);
void write_metrics_json(const std::string& path, const ExperimentConfig& config,
                        const ExperimentSummary& summary);
void write_trace_jsonl(const std::string& path, const ExperimentSummary& summary);
void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows);
void write_ablation_json(const std::string& path, const ExperimentConfig& config,
                         const std::vector<AblationRow>& rows);
void write_sweep_csv(const std::string& path,
                     const std::vector<std::pair<int, double>>& sweep);
void write_sweep_json(const std::string& path, const ExperimentConfig& config,
                      const std::vector<std::pair<int, double>>& sweep);

/// Human-readable label for a method spec ("-" for methods without banks).
std::string flags_label(const MethodSpec& method);

/// Aggregated view of one metrics JSON file.
struct MetricsFile {
  std::string path;
  std::string method;
  std::uint64_t seed = 0;
  std::size_t window = 50;
  std::vector<double> run_means;
  std::map<int, double> per_domain;  // mean across runs
  std::vector<double> mean_windowed;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

MetricsFile load_metrics_json(const std::string& path);

/// Percentage-point delta in the "(+x.x)" table style.
std::string format_signed_delta(double delta_points);

/// Cross-file summary text; per-domain deltas are reported against the
/// zero-shot entry when one of the files carries one.
std::string format_report(const std::vector<MetricsFile>& files);

/// Per-position trailing-window accuracy curves, one column per file.
void write_curves_csv(const std::string& path, const std::vector<MetricsFile>& files);

}  // namespace histpt
