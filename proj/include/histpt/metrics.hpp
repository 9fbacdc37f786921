#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace histpt {

/// Per-run accuracy bookkeeping. Accuracies are fractions in [0, 1]; report
/// formatting converts to percentage points.
struct RunMetrics {
  std::vector<std::uint8_t> per_sample_correct;
  std::vector<double> windowed_accuracy;  // trailing window, one value per sample
  std::map<int, double> per_domain_accuracy;
  std::map<int, std::size_t> per_domain_counts;
  double mean_accuracy = 0.0;
};

RunMetrics compute_metrics(std::vector<std::uint8_t> correct,
                           const std::vector<int>& domain_ids, std::size_t window);

/// Unbiased (n-1) standard deviation; 0 for fewer than two values.
double sample_std(const std::vector<double>& values);

double mean(const std::vector<double>& values);

}  // namespace histpt
