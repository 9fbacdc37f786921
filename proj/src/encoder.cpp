#include "histpt/encoder.hpp"

#include <utility>

#include "histpt/errors.hpp"
#include "histpt/random_init.hpp"
#include "histpt/rng.hpp"

namespace histpt {

namespace {

Vec pooled_input(const Matrix& tokens, std::span<const double> class_embedding) {
  if (tokens.cols() != class_embedding.size()) {
    throw UsageError("encode_text: token and class embedding dims differ");
  }
  Vec pooled(tokens.cols(), 0.0);
  for (std::size_t m = 0; m < tokens.rows(); ++m) {
    auto row = tokens.row(m);
    for (std::size_t c = 0; c < pooled.size(); ++c) pooled[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(tokens.rows() + 1);
  for (std::size_t c = 0; c < pooled.size(); ++c) {
    pooled[c] = (pooled[c] + class_embedding[c]) * inv;
  }
  return pooled;
}

}  // namespace

Vec encode_text(const ToyEncoder& encoder, const Matrix& tokens,
                std::span<const double> class_embedding) {
  return encoder.w_text.multiply(pooled_input(tokens, class_embedding));
}

Vec encode_image(const ToyEncoder& encoder, std::span<const double> raw) {
  return encoder.w_image.multiply(raw);
}

EncodingContext make_encoding_context(ToyEncoder encoder, ClassVocabulary vocab) {
  if (vocab.class_embeddings.rows() < 2) {
    throw ConfigError("encoding context: need at least 2 classes");
  }
  if (vocab.class_embeddings.cols() != encoder.w_text.cols()) {
    throw ConfigError("encoding context: class embedding dim does not match w_text");
  }
  Matrix projected(vocab.class_embeddings.rows(), encoder.w_text.rows());
  for (std::size_t c = 0; c < vocab.class_embeddings.rows(); ++c) {
    Vec p = encoder.w_text.multiply(vocab.class_embeddings.row(c));
    for (std::size_t f = 0; f < p.size(); ++f) projected(c, f) = p[f];
  }
  return {std::move(encoder), std::move(vocab), std::move(projected)};
}

Matrix encode_all_text(const EncodingContext& ctx, const Matrix& tokens) {
  if (tokens.cols() != ctx.encoder.w_text.cols()) {
    throw UsageError("encode_all_text: token dim does not match w_text");
  }
  Vec token_sum(tokens.cols(), 0.0);
  for (std::size_t m = 0; m < tokens.rows(); ++m) {
    auto row = tokens.row(m);
    for (std::size_t c = 0; c < token_sum.size(); ++c) token_sum[c] += row[c];
  }
  const Vec projected_sum = ctx.encoder.w_text.multiply(token_sum);
  const double inv = 1.0 / static_cast<double>(tokens.rows() + 1);

  Matrix u(ctx.projected_classes.rows(), ctx.projected_classes.cols());
  for (std::size_t c = 0; c < u.rows(); ++c) {
    auto base = ctx.projected_classes.row(c);
    for (std::size_t f = 0; f < u.cols(); ++f) {
      u(c, f) = (projected_sum[f] + base[f]) * inv;
    }
  }
  return u;
}

ToyEncoder make_toy_encoder(std::size_t feature_dim, std::size_t token_dim,
                            std::uint64_t seed) {
  if (token_dim < feature_dim) {
    throw ConfigError("token dimension must be at least the feature dimension");
  }
  Rng rng(seed, "w-text");
  return {orthonormal_rows(feature_dim, token_dim, rng), Matrix::identity(feature_dim)};
}

ClassVocabulary vocabulary_from_prototypes(const Matrix& w_text,
                                           const Matrix& prototypes) {
  if (prototypes.cols() != w_text.rows()) {
    throw ConfigError("vocabulary: prototype dim does not match w_text output dim");
  }
  ClassVocabulary vocab;
  vocab.class_embeddings = Matrix(prototypes.rows(), w_text.cols());
  for (std::size_t c = 0; c < prototypes.rows(); ++c) {
    Vec e = w_text.multiply_transposed(prototypes.row(c));
    for (std::size_t d = 0; d < e.size(); ++d) vocab.class_embeddings(c, d) = e[d];
    vocab.names.push_back("class_" + std::to_string(c));
  }
  return vocab;
}

}  // namespace histpt
