#include "histpt/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <utility>

#include "histpt/core_math.hpp"
#include "histpt/errors.hpp"
#include "histpt/random_init.hpp"
#include "histpt/rng.hpp"

namespace histpt {

namespace {

[[noreturn]] void rethrow_with_sample(std::size_t index) {
  const std::string prefix = "sample " + std::to_string(index) + ": ";
  try {
    throw;
  } catch (const DegenerateInputError& e) {
    throw DegenerateInputError(prefix + e.what());
  } catch (const UsageError& e) {
    throw UsageError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const ParseError& e) {
    throw ParseError(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

/// Shared backward pass. `logit_grad(p)` supplies dL/ds for the concrete
/// loss, where s are the cosine/tau logits; the rest of the chain (cosine,
/// linear encoder, mean pooling) is loss-independent. Every token row gets
/// the same gradient because the pooled input is a mean.
template <typename LogitGrad>
Matrix token_grad(const EncodingContext& ctx, const Matrix& tokens,
                  std::span<const double> v, double tau, LogitGrad&& logit_grad) {
  const Matrix u = encode_all_text(ctx, tokens);
  const Vec p = class_probabilities(u, v, tau);
  const Vec dlds = logit_grad(p);

  const double vnorm = norm(v);
  Vec f(u.cols(), 0.0);
  for (std::size_t c = 0; c < u.rows(); ++c) {
    auto uc = u.row(c);
    const double unorm = norm(uc);
    const double cosv = std::clamp(dot(uc, v) / (unorm * vnorm), -1.0, 1.0);
    const double coef = dlds[c] / tau;
    const double a = coef / (unorm * vnorm);
    const double b = coef * cosv / (unorm * unorm);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += a * v[j] - b * uc[j];
  }
  const Vec g = ctx.encoder.w_text.multiply_transposed(f);
  const double inv = 1.0 / static_cast<double>(tokens.rows() + 1);

  Matrix grad(tokens.rows(), tokens.cols());
  for (std::size_t m = 0; m < tokens.rows(); ++m) {
    for (std::size_t j = 0; j < tokens.cols(); ++j) grad(m, j) = g[j] * inv;
  }
  return grad;
}

}  // namespace

PromptState init_prompt_state(std::size_t num_tokens, std::size_t token_dim,
                              std::uint64_t seed) {
  if (num_tokens == 0 || token_dim == 0) {
    throw ConfigError("prompt state: token count and dim must be positive");
  }
  Rng rng(seed, "token-init");
  PromptState state;
  state.tokens = gaussian_matrix(num_tokens, token_dim, rng, 0.02);
  state.m1 = Matrix(num_tokens, token_dim);
  state.m2 = Matrix(num_tokens, token_dim);
  return state;
}

double self_loss(std::span<const double> probs, std::span<const double> target) {
  if (probs.size() != target.size()) {
    throw UsageError("self_loss: prediction/target length mismatch");
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (target[c] > 0.0) loss -= target[c] * std::log(probs[c]);
  }
  return loss;
}

Matrix grad_tokens(const EncodingContext& ctx, const Matrix& tokens,
                   std::span<const double> v, std::span<const double> target,
                   double tau) {
  return token_grad(ctx, tokens, v, tau, [&](const Vec& p) {
    // Softmax + cross-entropy collapses to p - target on the logits.
    Vec dlds(p.size());
    for (std::size_t c = 0; c < p.size(); ++c) dlds[c] = p[c] - target[c];
    return dlds;
  });
}

Matrix grad_tokens_entropy(const EncodingContext& ctx, const Matrix& tokens,
                           std::span<const double> v, double tau) {
  return token_grad(ctx, tokens, v, tau, [](const Vec& p) {
    const double h = prediction_entropy(p);
    Vec dlds(p.size());
    for (std::size_t c = 0; c < p.size(); ++c) {
      dlds[c] = p[c] > 0.0 ? -p[c] * (std::log(p[c]) + h) : 0.0;
    }
    return dlds;
  });
}

void optimizer_step(PromptState& state, const Matrix& grad,
                    const TunerConfig& config) {
  if (!grad.same_shape(state.tokens)) {
    throw UsageError("optimizer: gradient shape does not match tokens");
  }
  if (!grad.all_finite()) {
    std::cerr << "warning: skipping token update, non-finite gradient\n";
    return;
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step_count));
  const double decay = 1.0 - config.learning_rate * config.weight_decay;

  auto& t = state.tokens.data();
  auto& m1 = state.m1.data();
  auto& m2 = state.m2.data();
  const auto& g = grad.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * g[i];
    m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * g[i] * g[i];
    const double mhat = m1[i] / bc1;
    const double vhat = m2[i] / bc2;
    t[i] = t[i] * decay - config.learning_rate * mhat / (std::sqrt(vhat) + kEps);
  }
}

PredictionBundle tune_step(PromptState& state, KnowledgeBanks& banks,
                           const StreamSample& sample, const EncodingContext& ctx,
                           const TunerConfig& config,
                           const RetrievalOptions& options) {
  try {
    const Vec v = encode_image(ctx.encoder, sample.raw_feature);
    Matrix u = encode_all_text(ctx, state.tokens);
    Vec raw = class_probabilities(u, v, config.tau);
    PredictionBundle bundle =
        retrieve(banks.prototypes(), v, std::move(raw), config.tau, options);

    if (bundle.per_bank.empty()) {
      // Nothing to fuse yet: no update, and the pre-computed features are
      // still the current snapshot.
      banks.absorb(BankEntry::make(std::move(u), Vec(bundle.raw)));
      return bundle;
    }

    for (int s = 0; s < config.opt_steps; ++s) {
      Matrix grad = grad_tokens(ctx, state.tokens, v, bundle.fused, config.tau);
      optimizer_step(state, grad, config);
    }

    Matrix u_post = encode_all_text(ctx, state.tokens);
    Vec p_post = class_probabilities(u_post, v, config.tau);
    banks.absorb(BankEntry::make(std::move(u_post), std::move(p_post)));
    return bundle;
  } catch (...) {
    rethrow_with_sample(sample.index);
  }
}

Vec tpt_baseline_step(PromptState& state, const StreamSample& sample,
                      const EncodingContext& ctx, const TunerConfig& config) {
  try {
    const Vec v = encode_image(ctx.encoder, sample.raw_feature);
    const Matrix u = encode_all_text(ctx, state.tokens);
    Vec p = class_probabilities(u, v, config.tau);
    for (int s = 0; s < config.opt_steps; ++s) {
      Matrix grad = grad_tokens_entropy(ctx, state.tokens, v, config.tau);
      optimizer_step(state, grad, config);
    }
    return p;
  } catch (...) {
    rethrow_with_sample(sample.index);
  }
}

Vec zero_shot_predict(const PromptState& state, const StreamSample& sample,
                      const EncodingContext& ctx, const TunerConfig& config) {
  try {
    const Vec v = encode_image(ctx.encoder, sample.raw_feature);
    const Matrix u = encode_all_text(ctx, state.tokens);
    return class_probabilities(u, v, config.tau);
  } catch (...) {
    rethrow_with_sample(sample.index);
  }
}

GradCheckReport run_gradient_check(std::uint64_t seed, std::size_t trials,
                                   double tolerance, double fd_step) {
  GradCheckReport report;
  report.trials = trials;

  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, "gradcheck", t);
    const std::size_t C = 2 + rng.next_below(7);
    const std::size_t D = 4 + rng.next_below(29);
    const std::size_t M = 1 + rng.next_below(4);
    const std::size_t F = 2 + rng.next_below(15);
    const double tau = 0.05 + rng.next_double();

    ToyEncoder encoder{gaussian_matrix(F, D, rng, 1.0 / std::sqrt(double(D))),
                       Matrix::identity(F)};
    ClassVocabulary vocab;
    vocab.class_embeddings = gaussian_matrix(C, D, rng);
    for (std::size_t c = 0; c < C; ++c) {
      vocab.names.push_back("class_" + std::to_string(c));
    }
    const EncodingContext ctx =
        make_encoding_context(std::move(encoder), std::move(vocab));

    Vec v = gaussian_vec(F, rng);
    while (!(norm(v) > 1e-6)) v = gaussian_vec(F, rng);
    Matrix tokens = gaussian_matrix(M, D, rng, 0.5);
    const Vec target = softmax(gaussian_vec(C, rng));

    const auto predict = [&](const Matrix& tk) {
      return class_probabilities(encode_all_text(ctx, tk), v, tau);
    };
    const auto check = [&](const Matrix& analytic, auto&& loss) {
      Matrix fd(M, D);
      Matrix probe = tokens;
      for (std::size_t i = 0; i < probe.data().size(); ++i) {
        const double orig = probe.data()[i];
        probe.data()[i] = orig + fd_step;
        const double hi = loss(probe);
        probe.data()[i] = orig - fd_step;
        const double lo = loss(probe);
        probe.data()[i] = orig;
        fd.data()[i] = (hi - lo) / (2.0 * fd_step);
      }
      double diff2 = 0.0;
      double ref2 = 0.0;
      for (std::size_t i = 0; i < fd.data().size(); ++i) {
        const double d = analytic.data()[i] - fd.data()[i];
        diff2 += d * d;
        ref2 += fd.data()[i] * fd.data()[i];
      }
      const double rel = std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-12);
      report.max_rel_err = std::max(report.max_rel_err, rel);
      if (!(rel < tolerance)) report.failures += 1;
    };

    check(grad_tokens(ctx, tokens, v, target, tau),
          [&](const Matrix& tk) { return self_loss(predict(tk), target); });
    check(grad_tokens_entropy(ctx, tokens, v, tau),
          [&](const Matrix& tk) { return prediction_entropy(predict(tk)); });
  }
  return report;
}

}  // namespace histpt
