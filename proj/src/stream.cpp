#include "histpt/stream.hpp"

#include <cmath>
#include <utility>

#include "histpt/core_math.hpp"
#include "histpt/errors.hpp"
#include "histpt/random_init.hpp"
#include "histpt/rng.hpp"

namespace histpt {

namespace {

void validate(const StreamConfig& config, const Matrix& prototypes) {
  if (config.num_classes < 2) throw ConfigError("stream: need at least 2 classes");
  if (config.samples_per_domain == 0) {
    throw ConfigError("stream: samples_per_domain must be positive");
  }
  if (config.domains.empty()) throw ConfigError("stream: no domains configured");
  if (prototypes.rows() != config.num_classes ||
      prototypes.cols() != config.feature_dim) {
    throw ConfigError("stream: prototype shape does not match config");
  }
  for (const DomainSpec& d : config.domains) {
    if (d.transform.rows() != config.feature_dim ||
        d.transform.cols() != config.feature_dim ||
        d.bias.size() != config.feature_dim || !(d.noise_scale >= 0.0)) {
      throw ConfigError("stream: malformed domain spec");
    }
  }
}

std::vector<StreamSample> emit_blocks(const StreamConfig& config,
                                      const Matrix& prototypes,
                                      const std::vector<int>& order, Rng& rng) {
  std::vector<StreamSample> out;
  out.reserve(order.size() * config.samples_per_domain);
  for (int d : order) {
    if (d < 0 || static_cast<std::size_t>(d) >= config.domains.size()) {
      throw ConfigError("stream: unknown domain id " + std::to_string(d));
    }
    const DomainSpec& spec = config.domains[static_cast<std::size_t>(d)];
    std::vector<StreamSample> block;
    block.reserve(config.samples_per_domain);
    for (std::size_t i = 0; i < config.samples_per_domain; ++i) {
      const int cls = static_cast<int>(rng.next_below(config.num_classes));
      Vec x = spec.transform.multiply(prototypes.row(static_cast<std::size_t>(cls)));
      for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] += spec.bias[j] + spec.noise_scale * rng.next_gaussian();
      }
      block.push_back({std::move(x), d, cls, 0});
    }
    rng.shuffle(block);
    for (auto& s : block) out.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
  return out;
}

}  // namespace

Matrix generate_class_prototypes(std::size_t num_classes, std::size_t feature_dim,
                                 std::uint64_t seed, double similarity_cap) {
  if (num_classes < 2) throw ConfigError("prototypes: need at least 2 classes");
  if (feature_dim == 0) throw ConfigError("prototypes: feature_dim must be positive");
  if (!(similarity_cap > 0.0)) {
    throw ConfigError("prototypes: similarity cap must be positive");
  }

  constexpr int kMaxAttemptsPerClass = 10000;
  Rng rng(seed, "class-prototypes");
  Matrix protos(num_classes, feature_dim);
  for (std::size_t c = 0; c < num_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttemptsPerClass && !placed; ++attempt) {
      Vec cand = gaussian_vec(feature_dim, rng);
      const double n = norm(cand);
      if (!(n > 1e-8)) continue;
      for (double& x : cand) x /= n;
      bool ok = true;
      for (std::size_t prev = 0; prev < c && ok; ++prev) {
        ok = std::abs(dot(protos.row(prev), cand)) < similarity_cap;
      }
      if (ok) {
        for (std::size_t j = 0; j < feature_dim; ++j) protos(c, j) = cand[j];
        placed = true;
      }
    }
    if (!placed) {
      throw ConfigError(
          "prototypes: could not place " + std::to_string(num_classes) +
          " classes with pairwise |cosine| < " + std::to_string(similarity_cap) +
          " in dimension " + std::to_string(feature_dim) +
          "; use a larger feature dimension or a looser cap");
    }
  }
  return protos;
}

std::vector<DomainSpec> default_domain_specs(std::size_t feature_dim,
                                             std::uint64_t seed) {
  Rng rng(seed, "domains");

  // The two shifted domains share most of their bias direction (a common
  // "weather front" with per-domain character), so knowledge carried across
  // the stream stays relevant — the regime the banks are built for.
  Vec front = gaussian_vec(feature_dim, rng);
  {
    const double n = norm(front);
    for (double& x : front) x /= n;
  }

  auto shifted = [&](double alpha, double bias_norm, double noise,
                     double character) {
    // (1-alpha)*I + alpha*Q keeps singular values within [1-2*alpha, 1], so
    // the shift stays well-conditioned by construction.
    Matrix q = orthonormal_rows(feature_dim, feature_dim, rng);
    Matrix a(feature_dim, feature_dim);
    for (std::size_t r = 0; r < feature_dim; ++r) {
      for (std::size_t c = 0; c < feature_dim; ++c) {
        a(r, c) = alpha * q(r, c) + (r == c ? 1.0 - alpha : 0.0);
      }
    }
    Vec dir = gaussian_vec(feature_dim, rng);
    double n = norm(dir);
    for (std::size_t j = 0; j < dir.size(); ++j) {
      dir[j] = front[j] + character * dir[j] / n;
    }
    n = norm(dir);
    for (double& x : dir) x = x / n * bias_norm;
    return DomainSpec{std::move(a), std::move(dir), noise};
  };

  std::vector<DomainSpec> specs;
  specs.push_back({Matrix::identity(feature_dim), Vec(feature_dim, 0.0), 0.14});
  specs.push_back(shifted(0.06, 1.60, 0.30, 0.08));
  specs.push_back(shifted(0.09, 1.55, 0.26, 0.08));
  return specs;
}

std::vector<StreamSample> generate_stream(const StreamConfig& config,
                                          const Matrix& prototypes,
                                          std::size_t run_index) {
  validate(config, prototypes);
  Rng rng(config.seed, "stream", run_index);
  std::vector<int> order(config.domains.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);
  return emit_blocks(config, prototypes, order, rng);
}

std::vector<StreamSample> fixed_order_stream(const StreamConfig& config,
                                             const Matrix& prototypes,
                                             const std::vector<int>& order,
                                             std::size_t run_index) {
  validate(config, prototypes);
  if (order.empty()) throw ConfigError("stream: empty domain order");
  Rng rng(config.seed, "stream", run_index);
  return emit_blocks(config, prototypes, order, rng);
}

}  // namespace histpt
