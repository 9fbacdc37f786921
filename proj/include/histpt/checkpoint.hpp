#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "histpt/experiment.hpp"

namespace histpt {

/// Self-describing single-run snapshot: a config fingerprint, the prompt and
/// optimizer state, the bank contents, and the per-sample records produced so
/// far. All stream randomness re-derives from the config, so resuming
/// reproduces the uninterrupted run bit-exactly.
struct RunCheckpoint {
  std::uint64_t config_hash = 0;
  std::size_t run_index = 0;
  std::size_t next_sample = 0;
  PromptState state;
  std::vector<BankEntry> local_entries;
  std::vector<Matrix> hard_entries;
  std::optional<Matrix> global_prototype;
  std::vector<SampleRecord> records;
};

/// Hash over every semantically relevant config field (exact double bits).
std::uint64_t config_fingerprint(const ExperimentConfig& config);

void save_checkpoint(const std::string& path, const RunCheckpoint& checkpoint);
RunCheckpoint load_checkpoint(const std::string& path);

RunCheckpoint make_checkpoint(const ExperimentConfig& config, std::size_t run_index,
                              const ResumePoint& point);

/// Rebuilds live run state, validating the fingerprint against `config`.
ResumePoint resume_from_checkpoint(const RunCheckpoint& checkpoint,
                                   const ExperimentConfig& config);

}  // namespace histpt
