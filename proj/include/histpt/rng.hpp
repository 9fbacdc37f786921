#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace histpt {

/// Deterministic counter-based generator (SplitMix64 over a keyed counter).
///
/// Every stream is identified by (seed, purpose tag, index), so any draw in
/// the program can be re-derived independently of call order elsewhere.
/// Gaussian and shuffle helpers avoid std distributions on purpose: their
/// output is implementation-defined and would break cross-build determinism.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double next_double();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  /// Standard normal via Box-Muller; consumes two uniform draws.
  double next_gaussian();

  /// Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Number of 64-bit draws consumed so far.
  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// FNV-1a 64-bit hash; used for purpose tags and config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace histpt
