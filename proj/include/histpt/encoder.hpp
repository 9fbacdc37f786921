#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "histpt/matrix.hpp"

namespace histpt {

/// Frozen linear stand-ins for the text/image encoder pair. Only the prompt
/// tokens ever receive gradient updates; these weights never change.
struct ToyEncoder {
  Matrix w_text;   // F x D
  Matrix w_image;  // F x D_img
};

struct ClassVocabulary {
  std::vector<std::string> names;
  Matrix class_embeddings;  // C x D, row c = fixed embedding of class name c
};

/// u_c = w_text * mean(t_1, ..., t_M, e_c): mean-pool the tokens together
/// with the class embedding, then apply the frozen linear map. Linear in the
/// tokens, so gradients are exact and cheap.
Vec encode_text(const ToyEncoder& encoder, const Matrix& tokens,
                std::span<const double> class_embedding);

/// v = w_image * raw.
Vec encode_image(const ToyEncoder& encoder, std::span<const double> raw);

/// Frozen per-run encoding state with per-class projections cached, so the
/// per-sample hot path costs one matrix-vector product instead of C of them.
struct EncodingContext {
  ToyEncoder encoder;
  ClassVocabulary vocab;
  Matrix projected_classes;  // C x F, row c = w_text * e_c
};

EncodingContext make_encoding_context(ToyEncoder encoder, ClassVocabulary vocab);

/// Text features of every class under the given tokens. Row c equals
/// encode_text(encoder, tokens, e_c) up to floating-point association.
Matrix encode_all_text(const EncodingContext& ctx, const Matrix& tokens);

/// Encoder whose text map has orthonormal rows and whose image map is the
/// identity, so feature-space geometry survives the round trip.
ToyEncoder make_toy_encoder(std::size_t feature_dim, std::size_t token_dim,
                            std::uint64_t seed);

/// Class embeddings as pullbacks of feature-space prototypes through w_text
/// (e_c = w_text^T mu_c). With orthonormal w_text rows the untuned classifier
/// then scores classes by cosine against the prototypes themselves.
ClassVocabulary vocabulary_from_prototypes(const Matrix& w_text,
                                           const Matrix& prototypes);

}  // namespace histpt
