#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histpt/matrix.hpp"
#include "histpt/stream.hpp"

namespace histpt {

/// Result of loading a precomputed-feature file: samples in file order plus
/// the class count the file declares (binary header) or implies (JSON lines:
/// max class id + 1).
struct EmbeddingStream {
  std::uint32_t num_classes = 0;
  std::uint32_t feature_dim = 0;
  std::vector<StreamSample> samples;
};

/// Binary layout, little-endian: magic "HTPT", version u16, num_classes u32,
/// feature_dim u32, record count u64; then per record class u32, domain u32,
/// feature_dim x f32. Features are stored as f32, so values survive a round
/// trip bit-exactly only when they are f32-representable (loaders upcast).
void write_embeddings_binary(const std::string& path, std::uint32_t num_classes,
                             std::uint32_t feature_dim,
                             const std::vector<StreamSample>& samples);

/// JSON-lines alternative: one {"class": c, "domain": d, "feature": [...]}
/// object per line.
void write_embeddings_jsonl(const std::string& path, std::uint32_t feature_dim,
                            const std::vector<StreamSample>& samples);

/// Loads either format (sniffed from the leading magic bytes). Malformed
/// content raises a parse error with the byte offset (binary) or line number
/// (JSON lines); inconsistent dimensions raise a configuration error.
EmbeddingStream load_embedding_stream(const std::string& path);

/// Prompt token file: JSON {"num_tokens": M, "token_dim": D, "tokens": [[..]xM]}.
void save_tokens(const std::string& path, const Matrix& tokens);
Matrix load_tokens(const std::string& path);

}  // namespace histpt
