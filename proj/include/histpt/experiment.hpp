#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "histpt/encoder.hpp"
#include "histpt/metrics.hpp"
#include "histpt/retrieval.hpp"
#include "histpt/stream.hpp"
#include "histpt/tuner.hpp"

namespace histpt {

enum class MethodKind { zero_shot, tpt_baseline, histpt };

std::string method_name(MethodKind kind);
MethodKind parse_method(const std::string& name);

struct MethodSpec {
  MethodKind kind = MethodKind::histpt;
  RetrievalOptions flags{};  // consulted only when kind == histpt
};

/// One trace row: the per-sample prediction summary.
struct SampleRecord {
  std::size_t run = 0;
  std::size_t sample = 0;
  int domain = 0;
  int true_class = 0;
  std::size_t predicted = 0;
  bool correct = false;
  double raw_entropy = 0.0;
  double fused_entropy = 0.0;
  std::vector<std::string> sources;
  Vec weights;
};

struct RunResult {
  std::size_t run_index = 0;
  RunMetrics metrics;
  std::vector<SampleRecord> trace;   // filled only when tracing is on
  std::optional<std::string> error;  // set when the run aborted mid-stream
};

struct ExperimentConfig {
  StreamConfig stream;
  TunerConfig tuner;
  MethodSpec method;
  std::size_t window = 50;
  bool keep_trace = false;
  std::optional<std::vector<int>> fixed_order;  // overrides shuffled domain order
};

/// State frozen across all runs of an experiment: class prototypes, the
/// encoder pair, the vocabulary, and the shared initial prompt tokens.
struct Workbench {
  Matrix prototypes;  // C x D_img, feature space
  EncodingContext ctx;
  PromptState initial_state;
};

Workbench make_workbench(const StreamConfig& stream, const TunerConfig& tuner,
                         const std::optional<Matrix>& initial_tokens = std::nullopt);

/// Live state needed to continue a run mid-stream.
struct ResumePoint {
  PromptState state;
  KnowledgeBanks banks;
  std::vector<SampleRecord> records;
  std::size_t next_sample = 0;
};

/// Asks the run loop to hand a snapshot to `sink` once `after_samples`
/// samples have been processed.
struct CheckpointRequest {
  std::size_t after_samples = 0;
  std::function<void(const ResumePoint&)> sink;
};

/// One full pass over one stream. Per-sample failures stop the run and land
/// in RunResult::error with metrics over the completed prefix; the caller
/// decides whether that aborts the experiment.
RunResult run_single(const ExperimentConfig& config, const Workbench& bench,
                     const std::vector<StreamSample>& stream, std::size_t run_index,
                     const ResumePoint* resume = nullptr,
                     const CheckpointRequest* checkpoint = nullptr);

struct ExperimentSummary {
  std::vector<RunResult> runs;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // unbiased across runs
  std::map<int, double> per_domain_mean;
  std::vector<double> mean_windowed;  // across runs, per stream position
};

ExperimentSummary summarize(std::vector<RunResult> runs);

/// Runs stream.runs independent runs over synthetic streams in a worker
/// pool; results always merge in run-index order.
ExperimentSummary run_many(const ExperimentConfig& config, const Workbench& bench);

/// The same pool over caller-provided streams (loaded embeddings, custom
/// protocols); one run per stream.
ExperimentSummary run_on_streams(const ExperimentConfig& config,
                                 const Workbench& bench,
                                 const std::vector<std::vector<StreamSample>>& streams);

struct AblationRow {
  std::string label;
  RetrievalOptions flags;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

/// The nine bank-combination rows (none; each bank alone; pairs; all three
/// with uniform fusion; all three with adaptive fusion) over identical
/// streams.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base,
                                      const Workbench& bench);

/// One full experiment per optimization-step count, identical streams.
std::vector<std::pair<int, double>> run_step_sweep(const ExperimentConfig& base,
                                                   const Workbench& bench,
                                                   const std::vector<int>& steps);

}  // namespace histpt
