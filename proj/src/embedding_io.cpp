#include "histpt/embedding_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "histpt/errors.hpp"

namespace histpt {

namespace {

constexpr char kMagic[4] = {'H', 'T', 'P', 'T'};
constexpr std::uint16_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "embedding file I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::istream& in, std::uint64_t& offset, const std::string& path,
       const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw ParseError(path + ": truncated " + what + " at byte offset " +
                     std::to_string(offset));
  }
  offset += sizeof(T);
  return value;
}

EmbeddingStream load_binary(std::ifstream& in, const std::string& path) {
  std::uint64_t offset = 0;
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError(path + ": bad magic at byte offset 0");
  }
  offset = 4;

  const auto version = take<std::uint16_t>(in, offset, path, "version");
  if (version != kVersion) {
    throw ParseError(path + ": unsupported format version " +
                     std::to_string(version));
  }
  EmbeddingStream stream;
  stream.num_classes = take<std::uint32_t>(in, offset, path, "class count");
  stream.feature_dim = take<std::uint32_t>(in, offset, path, "feature dim");
  const auto count = take<std::uint64_t>(in, offset, path, "record count");
  if (stream.num_classes < 2 || stream.feature_dim == 0) {
    throw ConfigError(path + ": header declares " +
                      std::to_string(stream.num_classes) + " classes and dim " +
                      std::to_string(stream.feature_dim));
  }
  if (count == 0) {
    std::cerr << "warning: " << path << " has no records\n";
  }

  stream.samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    StreamSample s;
    const auto cls = take<std::uint32_t>(in, offset, path, "class id");
    if (cls >= stream.num_classes) {
      throw ConfigError(path + ": record " + std::to_string(i) + " has class " +
                        std::to_string(cls) + " outside the declared range");
    }
    s.true_class = static_cast<int>(cls);
    s.domain_id = static_cast<int>(take<std::uint32_t>(in, offset, path, "domain id"));
    s.raw_feature.resize(stream.feature_dim);
    for (std::uint32_t j = 0; j < stream.feature_dim; ++j) {
      s.raw_feature[j] = take<float>(in, offset, path, "feature value");
    }
    s.index = i;
    stream.samples.push_back(std::move(s));
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw ParseError(path + ": trailing bytes at offset " + std::to_string(offset));
  }
  return stream;
}

EmbeddingStream load_jsonl(std::ifstream& in, const std::string& path) {
  EmbeddingStream stream;
  std::string line;
  std::size_t line_no = 0;
  int max_class = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    StreamSample s;
    try {
      const nlohmann::json rec = nlohmann::json::parse(line);
      if (!rec.contains("class") || !rec.contains("domain") ||
          !rec.contains("feature") || !rec["feature"].is_array()) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": record needs class, domain, and feature fields");
      }
      s.true_class = rec["class"].get<int>();
      s.domain_id = rec["domain"].get<int>();
      s.raw_feature = rec["feature"].get<Vec>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (s.true_class < 0) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": negative class id");
    }
    if (stream.samples.empty()) {
      stream.feature_dim = static_cast<std::uint32_t>(s.raw_feature.size());
      if (stream.feature_dim == 0) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": empty feature");
      }
    } else if (s.raw_feature.size() != stream.feature_dim) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": feature dim differs from earlier records");
    }
    max_class = std::max(max_class, s.true_class);
    s.index = stream.samples.size();
    stream.samples.push_back(std::move(s));
  }
  if (stream.samples.empty()) {
    std::cerr << "warning: " << path << " has no records\n";
  }
  stream.num_classes = static_cast<std::uint32_t>(max_class + 1);
  return stream;
}

}  // namespace

void write_embeddings_binary(const std::string& path, std::uint32_t num_classes,
                             std::uint32_t feature_dim,
                             const std::vector<StreamSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, num_classes);
  put(out, feature_dim);
  put(out, static_cast<std::uint64_t>(samples.size()));
  for (const StreamSample& s : samples) {
    if (s.raw_feature.size() != feature_dim) {
      throw UsageError("embedding write: sample dim differs from header");
    }
    if (s.true_class < 0 ||
        static_cast<std::uint32_t>(s.true_class) >= num_classes) {
      throw UsageError("embedding write: class " + std::to_string(s.true_class) +
                       " outside the declared range");
    }
    put(out, static_cast<std::uint32_t>(s.true_class));
    put(out, static_cast<std::uint32_t>(s.domain_id));
    for (double x : s.raw_feature) put(out, static_cast<float>(x));
  }
  if (!out) throw ConfigError("write failed for " + path);
}

void write_embeddings_jsonl(const std::string& path, std::uint32_t feature_dim,
                            const std::vector<StreamSample>& samples) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  for (const StreamSample& s : samples) {
    if (s.raw_feature.size() != feature_dim) {
      throw UsageError("embedding write: sample dim differs from header");
    }
    nlohmann::ordered_json rec;
    rec["class"] = s.true_class;
    rec["domain"] = s.domain_id;
    rec["feature"] = s.raw_feature;
    out << rec.dump() << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path);
}

EmbeddingStream load_embedding_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) {
    return load_binary(in, path);
  }
  return load_jsonl(in, path);
}

void save_tokens(const std::string& path, const Matrix& tokens) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  nlohmann::ordered_json doc;
  doc["num_tokens"] = tokens.rows();
  doc["token_dim"] = tokens.cols();
  auto& rows = doc["tokens"] = nlohmann::ordered_json::array();
  for (std::size_t m = 0; m < tokens.rows(); ++m) {
    rows.push_back(Vec(tokens.row(m).begin(), tokens.row(m).end()));
  }
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path);
}

Matrix load_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.contains("num_tokens") || !doc.contains("token_dim") ||
      !doc.contains("tokens")) {
    throw ParseError(path + ": token file needs num_tokens, token_dim, tokens");
  }
  Matrix tokens;
  try {
    const auto rows = doc["num_tokens"].get<std::size_t>();
    const auto cols = doc["token_dim"].get<std::size_t>();
    const auto& data = doc["tokens"];
    if (!data.is_array() || data.size() != rows) {
      throw ParseError(path + ": tokens array does not match num_tokens");
    }
    tokens = Matrix(rows, cols);
    for (std::size_t m = 0; m < rows; ++m) {
      const Vec row = data[m].get<Vec>();
      if (row.size() != cols) {
        throw ParseError(path + ": token row " + std::to_string(m) +
                         " does not match token_dim");
      }
      for (std::size_t j = 0; j < cols; ++j) tokens(m, j) = row[j];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!tokens.all_finite()) throw ParseError(path + ": non-finite token value");
  return tokens;
}

}  // namespace histpt
