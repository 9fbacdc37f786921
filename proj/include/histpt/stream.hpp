#pragma once

#include <cstdint>
#include <vector>

#include "histpt/matrix.hpp"

namespace histpt {

struct StreamSample {
  Vec raw_feature;
  int domain_id = 0;
  int true_class = 0;  // metrics only; the tuner never reads it
  std::size_t index = 0;
};

/// One synthetic domain: an affine feature transform plus isotropic Gaussian
/// noise. Transforms are kept well-conditioned so a cosine classifier
/// degrades under the shift without collapsing.
struct DomainSpec {
  Matrix transform;  // D_img x D_img
  Vec bias;          // D_img
  double noise_scale = 0.0;
};

struct StreamConfig {
  std::size_t num_classes = 10;
  std::size_t feature_dim = 32;  // D_img
  std::size_t samples_per_domain = 200;
  std::vector<DomainSpec> domains;
  std::size_t runs = 100;
  std::uint64_t seed = 42;
};

/// Seeded unit-norm class prototypes with every pairwise |cosine| below
/// `similarity_cap`, found by rejection sampling. Deterministic given seed.
Matrix generate_class_prototypes(std::size_t num_classes, std::size_t feature_dim,
                                 std::uint64_t seed, double similarity_cap = 0.5);

/// The three reference domains: an identity domain plus two progressively
/// stronger shifts (partial rotation + bias + extra noise).
std::vector<DomainSpec> default_domain_specs(std::size_t feature_dim,
                                             std::uint64_t seed);

/// One run's sample flow: domain order is a seeded permutation (keyed by
/// run_index), classes are uniform, features are transform*prototype + bias +
/// noise, and samples are shuffled within each domain block.
std::vector<StreamSample> generate_stream(const StreamConfig& config,
                                          const Matrix& prototypes,
                                          std::size_t run_index);

/// Like generate_stream but with an explicit domain order (repeats allowed),
/// for fixed curriculum protocols such as normal->adverse sweeps.
std::vector<StreamSample> fixed_order_stream(const StreamConfig& config,
                                             const Matrix& prototypes,
                                             const std::vector<int>& order,
                                             std::size_t run_index = 0);

}  // namespace histpt
