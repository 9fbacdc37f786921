#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "histpt/matrix.hpp"

namespace histpt {

/// Cosine similarity between two equal-length vectors.
/// Throws DegenerateInputError if either vector has zero (or non-finite) norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Numerically stable softmax (max-subtraction). Input are raw scores.
Vec softmax(std::span<const double> scores);

/// Class posterior from per-class text embeddings and one image embedding:
/// softmax over cosine similarities divided by `tau`.
/// `text_embeddings` is C x F; `image` has length F. Requires C >= 2, tau > 0.
Vec class_probabilities(const Matrix& text_embeddings, std::span<const double> image,
                        double tau);

/// Index of the largest probability; lowest index wins ties.
std::size_t argmax_class(std::span<const double> probs);

/// Shannon entropy (natural log) of a distribution; 0*log(0) := 0.
/// Throws DegenerateInputError on negative entries or if the sum strays
/// from 1 by more than 1e-6.
double prediction_entropy(std::span<const double> probs);

/// Fusion weights for a set of candidate predictions: softmax over the
/// *negative* entropies, so low-entropy (confident) predictions dominate.
Vec fusion_weights(const std::vector<Vec>& predictions);

/// Weighted per-class mixture of candidate predictions. `weights` must sum
/// to ~1 and match predictions.size(); all predictions share a length.
Vec fuse_predictions(const std::vector<Vec>& predictions,
                     std::span<const double> weights);

}  // namespace histpt
