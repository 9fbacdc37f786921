#include "histpt/core_math.hpp"

#include <algorithm>
#include <cmath>

#include "histpt/errors.hpp"

namespace histpt {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DegenerateInputError("cosine_similarity: length mismatch");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > 0.0) || !(nb > 0.0) || !std::isfinite(na) || !std::isfinite(nb)) {
    throw DegenerateInputError("cosine_similarity: zero or non-finite norm");
  }
  const double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

Vec softmax(std::span<const double> scores) {
  if (scores.empty()) throw DegenerateInputError("softmax: empty input");
  const double m = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(m)) throw DegenerateInputError("softmax: non-finite score");
  Vec out(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - m);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

Vec class_probabilities(const Matrix& text_embeddings, std::span<const double> image,
                        double tau) {
  if (text_embeddings.rows() < 2) {
    throw DegenerateInputError("class_probabilities: need at least 2 classes");
  }
  if (!(tau > 0.0)) {
    throw DegenerateInputError("class_probabilities: temperature must be positive");
  }
  Vec scores(text_embeddings.rows());
  for (std::size_t c = 0; c < text_embeddings.rows(); ++c) {
    scores[c] = cosine_similarity(text_embeddings.row(c), image) / tau;
  }
  return softmax(scores);
}

std::size_t argmax_class(std::span<const double> probs) {
  if (probs.empty()) throw DegenerateInputError("argmax_class: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

double prediction_entropy(std::span<const double> probs) {
  if (probs.empty()) throw DegenerateInputError("prediction_entropy: empty input");
  double sum = 0.0;
  double h = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw DegenerateInputError("prediction_entropy: invalid probability");
    }
    sum += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw DegenerateInputError("prediction_entropy: probabilities do not sum to 1");
  }
  return h;
}

Vec fusion_weights(const std::vector<Vec>& predictions) {
  if (predictions.empty()) {
    throw DegenerateInputError("fusion_weights: no predictions");
  }
  Vec neg_entropy(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    neg_entropy[i] = -prediction_entropy(predictions[i]);
  }
  return softmax(neg_entropy);
}

Vec fuse_predictions(const std::vector<Vec>& predictions,
                     std::span<const double> weights) {
  if (predictions.empty() || predictions.size() != weights.size()) {
    throw DegenerateInputError("fuse_predictions: size mismatch");
  }
  const std::size_t n = predictions.front().size();
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != n) {
      throw DegenerateInputError("fuse_predictions: ragged predictions");
    }
    for (std::size_t c = 0; c < n; ++c) out[c] += weights[i] * predictions[i][c];
  }
  return out;
}

}  // namespace histpt
