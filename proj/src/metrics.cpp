#include "histpt/metrics.hpp"

#include <cmath>
#include <utility>

#include "histpt/errors.hpp"

namespace histpt {

RunMetrics compute_metrics(std::vector<std::uint8_t> correct,
                           const std::vector<int>& domain_ids, std::size_t window) {
  if (correct.size() != domain_ids.size()) {
    throw UsageError("metrics: correctness/domain length mismatch");
  }
  if (window == 0) throw ConfigError("metrics: window must be positive");

  RunMetrics m;
  m.per_sample_correct = std::move(correct);

  std::size_t hits = 0;
  std::map<int, std::size_t> domain_hits;
  for (std::size_t i = 0; i < m.per_sample_correct.size(); ++i) {
    hits += m.per_sample_correct[i];
    m.per_domain_counts[domain_ids[i]] += 1;
    domain_hits[domain_ids[i]] += m.per_sample_correct[i];
  }
  m.mean_accuracy = m.per_sample_correct.empty()
                        ? 0.0
                        : static_cast<double>(hits) /
                              static_cast<double>(m.per_sample_correct.size());
  for (const auto& [domain, count] : m.per_domain_counts) {
    m.per_domain_accuracy[domain] =
        static_cast<double>(domain_hits[domain]) / static_cast<double>(count);
  }

  m.windowed_accuracy.resize(m.per_sample_correct.size());
  std::size_t in_window = 0;
  for (std::size_t i = 0; i < m.per_sample_correct.size(); ++i) {
    in_window += m.per_sample_correct[i];
    if (i >= window) in_window -= m.per_sample_correct[i - window];
    const std::size_t span = std::min(window, i + 1);
    m.windowed_accuracy[i] =
        static_cast<double>(in_window) / static_cast<double>(span);
  }
  return m;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mu = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace histpt
