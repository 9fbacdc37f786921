#pragma once

#include <span>
#include <string>
#include <vector>

#include "histpt/banks.hpp"
#include "histpt/matrix.hpp"

namespace histpt {

/// Which prototype sources retrieval may use, and whether fusion weights are
/// entropy-adaptive or uniform. Bank maintenance itself is unaffected; these
/// flags gate only what the prediction step sees.
struct RetrievalOptions {
  bool use_local = true;
  bool use_hard = true;
  bool use_global = true;
  bool adaptive_weights = true;
};

/// Everything the regularized prediction step produced for one sample.
struct PredictionBundle {
  Vec raw;                                // prediction from the current tokens
  std::vector<std::string> sources;       // subset of {"local","hard","global"}
  std::vector<Vec> per_bank;              // parallel to sources
  Vec weights;                            // parallel to sources; sums to 1
  Vec fused;                              // == raw when sources is empty
};

/// Class posterior from a prototype matrix: softmax over cosine(row, v) / tau.
/// Same functional form as the token-based classifier, with prototype rows
/// standing in for text features.
Vec bank_prediction(const Matrix& prototype, std::span<const double> v, double tau);

/// Regularized prediction: per-bank posteriors for every available (and
/// enabled) prototype, fusion weights from their entropies (or uniform when
/// adaptive weighting is off), and the weighted mixture. With no usable
/// source the bundle falls back to the raw prediction untouched.
PredictionBundle retrieve(const BankPrototypes& prototypes, std::span<const double> v,
                          Vec raw, double tau, const RetrievalOptions& options = {});

}  // namespace histpt
