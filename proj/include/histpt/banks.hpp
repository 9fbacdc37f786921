#pragma once

#include <cstddef>
#include <deque>
#include <optional>

#include "histpt/matrix.hpp"

namespace histpt {

/// One historical snapshot: the per-class text features in effect when a
/// sample was processed, the prediction it produced, and that prediction's
/// cached entropy (the hard-sample ranking key).
struct BankEntry {
  Matrix text_features;  // C x D, row c = text feature of class c
  Vec prediction;        // length C
  double entropy = 0.0;

  static BankEntry make(Matrix text_features, Vec prediction);
};

/// FIFO of the most recent snapshots — fresh, up-to-date knowledge.
class LocalBank {
 public:
  explicit LocalBank(std::size_t capacity);

  /// Appends; when the bank overflows, removes and returns the oldest entry
  /// so the caller can feed it to the global bank.
  std::optional<BankEntry> enqueue(BankEntry entry);

  const std::deque<BankEntry>& entries() const { return entries_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::size_t capacity_;
  std::deque<BankEntry> entries_;
};

/// FIFO of compacted hard-sample records (feature matrices only).
class HardBank {
 public:
  explicit HardBank(std::size_t capacity);

  std::optional<Matrix> enqueue(Matrix record);

  const std::deque<Matrix>& entries() const { return entries_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::size_t capacity_;
  std::deque<Matrix> entries_;
};

/// Momentum-accumulated per-class prototype fed by evictions from the other
/// two banks. Seeded by the first fresh input (a zero prototype would have
/// zero-norm rows and poison cosine similarity).
class GlobalBank {
 public:
  explicit GlobalBank(double gamma);

  /// First call stores `fresh` as-is; later calls blend
  /// (1 - gamma) * fresh + gamma * previous prototype.
  void update(const Matrix& fresh);

  bool initialized() const { return initialized_; }
  const Matrix& prototype() const { return prototype_; }
  double gamma() const { return gamma_; }

 private:
  double gamma_;
  bool initialized_ = false;
  Matrix prototype_;
};

/// Mean feature matrix of the min(k, size) highest-entropy resident entries.
/// Entropy ties keep the older entry first so runs are reproducible.
/// Empty bank -> nullopt (callers skip the hard-bank update that step).
std::optional<Matrix> select_hard(const LocalBank& bank, std::size_t k);

/// Combines the records evicted this step into the global bank's fresh input:
/// both present -> element-wise mean; one present -> that one; none -> nullopt.
std::optional<Matrix> compact_evicted(const std::optional<Matrix>& local_evicted,
                                      const std::optional<Matrix>& hard_evicted);

struct BankPrototypes {
  std::optional<Matrix> local;
  std::optional<Matrix> hard;
  std::optional<Matrix> global;
};

/// Per-class prototypes of the current bank contents. FIFO prototypes are the
/// mean over resident entries (divisor = current fill, so partially full banks
/// still yield true means); the global prototype is the stored matrix once
/// initialized. Absent members signal cold start.
BankPrototypes bank_prototypes(const LocalBank& local, const HardBank& hard,
                               const GlobalBank& global);

/// The bank triple one tuning loop owns, plus the per-sample maintenance
/// cadence: local enqueue, hard-sample compaction + enqueue, then eviction-fed
/// momentum update.
class KnowledgeBanks {
 public:
  KnowledgeBanks(std::size_t local_capacity, std::size_t hard_capacity,
                 std::size_t hard_k, double gamma);

  /// Runs one maintenance step with the given snapshot.
  void absorb(BankEntry entry);

  BankPrototypes prototypes() const { return bank_prototypes(local_, hard_, global_); }

  LocalBank& local() { return local_; }
  const LocalBank& local() const { return local_; }
  HardBank& hard() { return hard_; }
  const HardBank& hard() const { return hard_; }
  GlobalBank& global() { return global_; }
  const GlobalBank& global() const { return global_; }
  std::size_t hard_k() const { return hard_k_; }

 private:
  std::size_t hard_k_;
  LocalBank local_;
  HardBank hard_;
  GlobalBank global_;
};

}  // namespace histpt
