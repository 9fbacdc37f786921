#include "histpt/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

#include "histpt/errors.hpp"
#include "histpt/rng.hpp"

namespace histpt {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Incremental FNV-1a over raw value bytes; doubles hash by bit pattern so
/// two configs collide only when they are numerically identical.
class Fingerprint {
 public:
  void add_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(std::uint64_t v) { add_bytes(&v, sizeof(v)); }
  void add(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    add(bits);
  }
  void add(bool v) { add(static_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

ordered_json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) {
    throw ParseError("checkpoint: matrix data does not match its shape");
  }
  Matrix m(rows, cols);
  m.data() = data;
  return m;
}

ordered_json record_to_json(const SampleRecord& rec) {
  return {{"run", rec.run},
          {"sample", rec.sample},
          {"domain", rec.domain},
          {"true_class", rec.true_class},
          {"predicted", rec.predicted},
          {"correct", rec.correct},
          {"raw_entropy", rec.raw_entropy},
          {"fused_entropy", rec.fused_entropy},
          {"sources", rec.sources},
          {"weights", rec.weights}};
}

SampleRecord record_from_json(const nlohmann::json& j) {
  SampleRecord rec;
  rec.run = j.at("run").get<std::size_t>();
  rec.sample = j.at("sample").get<std::size_t>();
  rec.domain = j.at("domain").get<int>();
  rec.true_class = j.at("true_class").get<int>();
  rec.predicted = j.at("predicted").get<std::size_t>();
  rec.correct = j.at("correct").get<bool>();
  rec.raw_entropy = j.at("raw_entropy").get<double>();
  rec.fused_entropy = j.at("fused_entropy").get<double>();
  rec.sources = j.at("sources").get<std::vector<std::string>>();
  rec.weights = j.at("weights").get<Vec>();
  return rec;
}

}  // namespace

std::uint64_t config_fingerprint(const ExperimentConfig& config) {
  Fingerprint fp;
  fp.add(static_cast<std::uint64_t>(config.method.kind));
  fp.add(config.method.flags.use_local);
  fp.add(config.method.flags.use_hard);
  fp.add(config.method.flags.use_global);
  fp.add(config.method.flags.adaptive_weights);

  fp.add(static_cast<std::uint64_t>(config.stream.num_classes));
  fp.add(static_cast<std::uint64_t>(config.stream.feature_dim));
  fp.add(static_cast<std::uint64_t>(config.stream.samples_per_domain));
  fp.add(static_cast<std::uint64_t>(config.stream.domains.size()));
  fp.add(config.stream.seed);
  fp.add(static_cast<std::uint64_t>(config.window));
  if (config.fixed_order) {
    for (int d : *config.fixed_order) fp.add(static_cast<std::uint64_t>(d));
  }

  fp.add(config.tuner.learning_rate);
  fp.add(config.tuner.weight_decay);
  fp.add(static_cast<std::uint64_t>(config.tuner.opt_steps));
  fp.add(static_cast<std::uint64_t>(config.tuner.num_tokens));
  fp.add(static_cast<std::uint64_t>(config.tuner.token_dim));
  fp.add(static_cast<std::uint64_t>(config.tuner.local_size));
  fp.add(static_cast<std::uint64_t>(config.tuner.hard_size));
  fp.add(static_cast<std::uint64_t>(config.tuner.hard_k));
  fp.add(config.tuner.gamma);
  fp.add(config.tuner.tau);
  return fp.value();
}

void save_checkpoint(const std::string& path, const RunCheckpoint& checkpoint) {
  ordered_json doc;
  doc["schema"] = "histpt-checkpoint-v1";
  doc["config_hash"] = checkpoint.config_hash;
  doc["run_index"] = checkpoint.run_index;
  doc["next_sample"] = checkpoint.next_sample;
  doc["state"] = {{"tokens", matrix_to_json(checkpoint.state.tokens)},
                  {"m1", matrix_to_json(checkpoint.state.m1)},
                  {"m2", matrix_to_json(checkpoint.state.m2)},
                  {"step_count", checkpoint.state.step_count}};

  auto& local = doc["local_entries"] = ordered_json::array();
  for (const BankEntry& e : checkpoint.local_entries) {
    local.push_back({{"text_features", matrix_to_json(e.text_features)},
                     {"prediction", e.prediction},
                     {"entropy", e.entropy}});
  }
  auto& hard = doc["hard_entries"] = ordered_json::array();
  for (const Matrix& m : checkpoint.hard_entries) hard.push_back(matrix_to_json(m));
  if (checkpoint.global_prototype) {
    doc["global_prototype"] = matrix_to_json(*checkpoint.global_prototype);
  } else {
    doc["global_prototype"] = nullptr;
  }
  auto& records = doc["records"] = ordered_json::array();
  for (const SampleRecord& r : checkpoint.records) records.push_back(record_to_json(r));

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path);
}

RunCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.contains("schema") || doc["schema"] != "histpt-checkpoint-v1") {
    throw ParseError(path + ": not a histpt-checkpoint-v1 file");
  }

  RunCheckpoint cp;
  try {
    cp.config_hash = doc.at("config_hash").get<std::uint64_t>();
    cp.run_index = doc.at("run_index").get<std::size_t>();
    cp.next_sample = doc.at("next_sample").get<std::size_t>();
    const auto& state = doc.at("state");
    cp.state.tokens = matrix_from_json(state.at("tokens"));
    cp.state.m1 = matrix_from_json(state.at("m1"));
    cp.state.m2 = matrix_from_json(state.at("m2"));
    cp.state.step_count = state.at("step_count").get<long long>();
    for (const auto& e : doc.at("local_entries")) {
      cp.local_entries.push_back({matrix_from_json(e.at("text_features")),
                                  e.at("prediction").get<Vec>(),
                                  e.at("entropy").get<double>()});
    }
    for (const auto& m : doc.at("hard_entries")) {
      cp.hard_entries.push_back(matrix_from_json(m));
    }
    if (!doc.at("global_prototype").is_null()) {
      cp.global_prototype = matrix_from_json(doc.at("global_prototype"));
    }
    for (const auto& r : doc.at("records")) {
      cp.records.push_back(record_from_json(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return cp;
}

RunCheckpoint make_checkpoint(const ExperimentConfig& config, std::size_t run_index,
                              const ResumePoint& point) {
  RunCheckpoint cp;
  cp.config_hash = config_fingerprint(config);
  cp.run_index = run_index;
  cp.next_sample = point.next_sample;
  cp.state = point.state;
  cp.local_entries.assign(point.banks.local().entries().begin(),
                          point.banks.local().entries().end());
  cp.hard_entries.assign(point.banks.hard().entries().begin(),
                         point.banks.hard().entries().end());
  if (point.banks.global().initialized()) {
    cp.global_prototype = point.banks.global().prototype();
  }
  cp.records = point.records;
  return cp;
}

ResumePoint resume_from_checkpoint(const RunCheckpoint& checkpoint,
                                   const ExperimentConfig& config) {
  if (checkpoint.config_hash != config_fingerprint(config)) {
    throw ConfigError("checkpoint was captured under a different configuration");
  }
  KnowledgeBanks banks(config.tuner.local_size, config.tuner.hard_size,
                       config.tuner.hard_k, config.tuner.gamma);
  if (checkpoint.local_entries.size() > config.tuner.local_size ||
      checkpoint.hard_entries.size() > config.tuner.hard_size) {
    throw ConfigError("checkpoint bank contents exceed configured capacities");
  }
  for (const BankEntry& e : checkpoint.local_entries) banks.local().enqueue(e);
  for (const Matrix& m : checkpoint.hard_entries) banks.hard().enqueue(m);
  if (checkpoint.global_prototype) {
    // First update stores the matrix verbatim, restoring the exact prototype.
    banks.global().update(*checkpoint.global_prototype);
  }
  return ResumePoint{checkpoint.state, std::move(banks), checkpoint.records,
                     checkpoint.next_sample};
}

}  // namespace histpt
