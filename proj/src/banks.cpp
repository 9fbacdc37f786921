#include "histpt/banks.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "histpt/core_math.hpp"
#include "histpt/errors.hpp"

namespace histpt {

namespace {

void check_shape(const Matrix& incoming, const Matrix& resident, const char* what) {
  if (!incoming.same_shape(resident)) {
    throw UsageError(std::string(what) + ": feature shape mismatch");
  }
}

Matrix mean_of(const std::deque<Matrix>& mats) {
  Matrix acc = mats.front();
  for (std::size_t i = 1; i < mats.size(); ++i) {
    for (std::size_t j = 0; j < acc.data().size(); ++j) {
      acc.data()[j] += mats[i].data()[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(mats.size());
  for (double& x : acc.data()) x *= inv;
  return acc;
}

}  // namespace

BankEntry BankEntry::make(Matrix text_features, Vec prediction) {
  if (text_features.rows() != prediction.size()) {
    throw UsageError("bank entry: one feature row per class required");
  }
  const double h = prediction_entropy(prediction);
  return {std::move(text_features), std::move(prediction), h};
}

LocalBank::LocalBank(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("local bank capacity must be positive");
}

std::optional<BankEntry> LocalBank::enqueue(BankEntry entry) {
  if (!entries_.empty()) {
    check_shape(entry.text_features, entries_.front().text_features, "local bank");
  }
  entries_.push_back(std::move(entry));
  if (entries_.size() > capacity_) {
    BankEntry evicted = std::move(entries_.front());
    entries_.pop_front();
    return evicted;
  }
  return std::nullopt;
}

HardBank::HardBank(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("hard bank capacity must be positive");
}

std::optional<Matrix> HardBank::enqueue(Matrix record) {
  if (!entries_.empty()) check_shape(record, entries_.front(), "hard bank");
  entries_.push_back(std::move(record));
  if (entries_.size() > capacity_) {
    Matrix evicted = std::move(entries_.front());
    entries_.pop_front();
    return evicted;
  }
  return std::nullopt;
}

GlobalBank::GlobalBank(double gamma) : gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("momentum coefficient must lie in [0, 1]");
  }
}

void GlobalBank::update(const Matrix& fresh) {
  if (!fresh.all_finite()) throw UsageError("global bank: non-finite fresh input");
  if (!initialized_) {
    prototype_ = fresh;
    initialized_ = true;
    return;
  }
  check_shape(fresh, prototype_, "global bank");
  for (std::size_t j = 0; j < prototype_.data().size(); ++j) {
    prototype_.data()[j] =
        (1.0 - gamma_) * fresh.data()[j] + gamma_ * prototype_.data()[j];
  }
}

std::optional<Matrix> select_hard(const LocalBank& bank, std::size_t k) {
  if (k == 0) throw UsageError("select_hard: k must be positive");
  if (bank.empty()) return std::nullopt;

  const auto& entries = bank.entries();
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].entropy > entries[b].entropy;
  });

  const std::size_t take = std::min(k, entries.size());
  Matrix acc = entries[order[0]].text_features;
  for (std::size_t i = 1; i < take; ++i) {
    const auto& m = entries[order[i]].text_features;
    for (std::size_t j = 0; j < acc.data().size(); ++j) acc.data()[j] += m.data()[j];
  }
  const double inv = 1.0 / static_cast<double>(take);
  for (double& x : acc.data()) x *= inv;
  return acc;
}

std::optional<Matrix> compact_evicted(const std::optional<Matrix>& local_evicted,
                                      const std::optional<Matrix>& hard_evicted) {
  if (local_evicted && hard_evicted) {
    check_shape(*local_evicted, *hard_evicted, "compact_evicted");
    Matrix out = *local_evicted;
    for (std::size_t j = 0; j < out.data().size(); ++j) {
      out.data()[j] = 0.5 * (out.data()[j] + hard_evicted->data()[j]);
    }
    return out;
  }
  if (local_evicted) return *local_evicted;
  if (hard_evicted) return *hard_evicted;
  return std::nullopt;
}

BankPrototypes bank_prototypes(const LocalBank& local, const HardBank& hard,
                               const GlobalBank& global) {
  BankPrototypes out;
  if (!local.empty()) {
    std::deque<Matrix> feats;
    for (const auto& e : local.entries()) feats.push_back(e.text_features);
    out.local = mean_of(feats);
  }
  if (!hard.empty()) out.hard = mean_of(hard.entries());
  if (global.initialized()) out.global = global.prototype();
  return out;
}

KnowledgeBanks::KnowledgeBanks(std::size_t local_capacity, std::size_t hard_capacity,
                               std::size_t hard_k, double gamma)
    : hard_k_(hard_k),
      local_(local_capacity),
      hard_(hard_capacity),
      global_(gamma) {
  if (hard_k == 0) throw ConfigError("hard-sample selection count must be positive");
}

void KnowledgeBanks::absorb(BankEntry entry) {
  std::optional<BankEntry> local_evicted = local_.enqueue(std::move(entry));

  std::optional<Matrix> hard_evicted;
  if (auto compacted = select_hard(local_, hard_k_)) {
    hard_evicted = hard_.enqueue(std::move(*compacted));
  }

  std::optional<Matrix> local_features;
  if (local_evicted) local_features = std::move(local_evicted->text_features);
  if (auto fresh = compact_evicted(local_features, hard_evicted)) {
    global_.update(*fresh);
  }
}

}  // namespace histpt
