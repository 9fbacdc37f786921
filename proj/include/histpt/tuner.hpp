#pragma once

#include <cstdint>
#include <span>

#include "histpt/banks.hpp"
#include "histpt/encoder.hpp"
#include "histpt/matrix.hpp"
#include "histpt/retrieval.hpp"
#include "histpt/stream.hpp"

namespace histpt {

struct TunerConfig {
  double learning_rate = 0.005;
  double weight_decay = 0.01;
  int opt_steps = 1;
  std::size_t num_tokens = 4;   // M
  std::size_t token_dim = 512;  // D
  std::size_t local_size = 32;  // L
  std::size_t hard_size = 32;   // H
  std::size_t hard_k = 16;      // K
  double gamma = 0.99;
  double tau = 0.01;
};

/// The learnable prompt tokens plus their optimizer accumulators.
struct PromptState {
  Matrix tokens;  // M x D
  Matrix m1;      // first-moment accumulator, same shape
  Matrix m2;      // second-moment accumulator, same shape
  long long step_count = 0;
};

/// Tokens drawn from N(0, 0.02^2) with zeroed optimizer state.
PromptState init_prompt_state(std::size_t num_tokens, std::size_t token_dim,
                              std::uint64_t seed);

/// Cross-entropy of the prediction against a constant target:
/// -sum_c target_c * log(probs_c). No gradient flows through the target.
double self_loss(std::span<const double> probs, std::span<const double> target);

/// Exact gradient of self_loss(classifier(tokens), target) with respect to
/// the tokens. The chain is closed-form: cross-entropy -> softmax over cosine
/// logits -> cosine -> linear text encoding; every token row receives the
/// same gradient because pooling is a mean.
Matrix grad_tokens(const EncodingContext& ctx, const Matrix& tokens,
                   std::span<const double> v, std::span<const double> target,
                   double tau);

/// Exact gradient of prediction_entropy(classifier(tokens)) with respect to
/// the tokens (the no-banks baseline objective).
Matrix grad_tokens_entropy(const EncodingContext& ctx, const Matrix& tokens,
                           std::span<const double> v, double tau);

/// Decoupled-weight-decay adaptive-moment update (beta1=0.9, beta2=0.999,
/// eps=1e-8, bias-corrected). Non-finite gradients skip the update with a
/// warning instead of corrupting the tokens.
void optimizer_step(PromptState& state, const Matrix& grad,
                    const TunerConfig& config);

/// One full online step: predict with the current tokens, regularize the
/// prediction through the banks, optimize the tokens toward the fused target
/// (skipped while every bank is still empty), then store a fresh post-update
/// snapshot in the banks. Returns the prediction bundle for this sample.
PredictionBundle tune_step(PromptState& state, KnowledgeBanks& banks,
                           const StreamSample& sample, const EncodingContext& ctx,
                           const TunerConfig& config,
                           const RetrievalOptions& options = {});

/// Baseline step: per-sample entropy minimization of the tokens, no banks.
/// Returns the prediction made before the update.
Vec tpt_baseline_step(PromptState& state, const StreamSample& sample,
                      const EncodingContext& ctx, const TunerConfig& config);

/// Pure inference with the current tokens; never mutates anything.
Vec zero_shot_predict(const PromptState& state, const StreamSample& sample,
                      const EncodingContext& ctx, const TunerConfig& config);

/// Randomized verification of both analytic gradients against central finite
/// differences over freshly sampled small configurations.
struct GradCheckReport {
  std::size_t trials = 0;
  std::size_t failures = 0;
  double max_rel_err = 0.0;
  bool passed() const { return trials > 0 && failures == 0; }
};

GradCheckReport run_gradient_check(std::uint64_t seed, std::size_t trials,
                                   double tolerance = 1e-4, double fd_step = 1e-5);

}  // namespace histpt
