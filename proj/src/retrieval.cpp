#include "histpt/retrieval.hpp"

#include <utility>

#include "histpt/core_math.hpp"
#include "histpt/errors.hpp"

namespace histpt {

Vec bank_prediction(const Matrix& prototype, std::span<const double> v, double tau) {
  for (std::size_t c = 0; c < prototype.rows(); ++c) {
    if (!(norm(prototype.row(c)) > 0.0)) {
      throw DegenerateInputError("bank prediction: zero-norm prototype row for class " +
                                 std::to_string(c));
    }
  }
  return class_probabilities(prototype, v, tau);
}

PredictionBundle retrieve(const BankPrototypes& prototypes, std::span<const double> v,
                          Vec raw, double tau, const RetrievalOptions& options) {
  PredictionBundle bundle;
  bundle.raw = std::move(raw);

  const std::pair<const char*, const std::optional<Matrix>*> candidates[] = {
      {"local", options.use_local ? &prototypes.local : nullptr},
      {"hard", options.use_hard ? &prototypes.hard : nullptr},
      {"global", options.use_global ? &prototypes.global : nullptr},
  };
  for (const auto& [name, proto] : candidates) {
    if (proto == nullptr || !proto->has_value()) continue;
    bundle.sources.emplace_back(name);
    bundle.per_bank.push_back(bank_prediction(**proto, v, tau));
  }

  if (bundle.per_bank.empty()) {
    bundle.fused = bundle.raw;
    return bundle;
  }

  if (options.adaptive_weights) {
    bundle.weights = fusion_weights(bundle.per_bank);
  } else {
    bundle.weights.assign(bundle.per_bank.size(),
                          1.0 / static_cast<double>(bundle.per_bank.size()));
  }
  bundle.fused = fuse_predictions(bundle.per_bank, bundle.weights);
  return bundle;
}

}  // namespace histpt
