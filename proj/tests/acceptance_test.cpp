// Acceptance gate: one self-contained check per release criterion, one
// [PASS]/[FAIL] line each. Exits non-zero if anything fails, so `ctest`
// reports the gate faithfully.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "histpt/banks.hpp"
#include "histpt/core_math.hpp"
#include "histpt/embedding_io.hpp"
#include "histpt/encoder.hpp"
#include "histpt/experiment.hpp"
#include "histpt/reporting.hpp"
#include "histpt/rng.hpp"
#include "histpt/stream.hpp"
#include "histpt/tuner.hpp"
#include "testutil.hpp"

namespace {

using namespace histpt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Regression pins, measured once on the reference benchmark (seed 42, C=10,
// D_img=32, 3 domains x 200 samples, 100 shuffled runs) and kept one full
// accuracy point looser than the measured values. A drop past any pin means
// behavior changed, not noise. The qualitative orderings themselves are
// asserted strictly on top of the pins.
// ---------------------------------------------------------------------------
constexpr double kPinTptSelfDropPoints = -0.15;      // measured +0.85
constexpr double kPinTptBelowZeroShotPoints = 3.80;  // measured +4.80
constexpr double kPinHistptOverZeroShotPoints = -1.26;  // measured -0.26
constexpr double kPinHistptOverTptPoints = 2.85;     // measured +3.85
// The final-third criterion carries an explicit one-point tolerance;
// measured -0.16.
constexpr double kPinHistptFinalVsZeroShotPoints = -1.0;
constexpr double kPinFixedOrderMinDeltaPoints = 0.0;  // measured exactly 0.0

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", index, name,
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double elapsed_s(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

ExperimentConfig reference_config(MethodKind kind) {
  ExperimentConfig cfg;  // defaults are the reference benchmark
  cfg.method.kind = kind;
  cfg.stream.domains = default_domain_specs(cfg.stream.feature_dim, cfg.stream.seed);
  return cfg;
}

double mean_over(const std::vector<double>& xs, std::size_t lo, std::size_t hi) {
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) sum += xs[i];
  return sum / static_cast<double>(hi - lo);
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "histpt_acceptance";
  fs::create_directories(dir);
  return dir;
}

std::vector<char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients vs central finite differences.
// ---------------------------------------------------------------------------
void criterion_gradients() {
  const auto start = Clock::now();
  const GradCheckReport r = run_gradient_check(2024, 100, 1e-4, 1e-5);
  const double secs = elapsed_s(start);
  report(1, "gradient oracle", r.passed() && secs < 10.0,
         fmt("100 configs x 2 losses, max rel err %.2e, %.2fs (budget 10s)",
             r.max_rel_err, secs));
}

// ---------------------------------------------------------------------------
// 2. Closed-form examples, checked against values computed longhand here.
// ---------------------------------------------------------------------------
void criterion_closed_form() {
  const auto start = Clock::now();
  std::ostringstream why;
  bool ok = true;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) {
      ok = false;
      why << (why.tellp() > 0 ? "; " : "") << what;
    }
  };

  expect(std::abs(cosine_similarity(Vec{3, 4}, Vec{4, 3}) - 0.96) < 1e-12,
         "cosine 24/25");

  const Vec p = class_probabilities(Matrix::identity(2), Vec{1.0, 0.0}, 1.0);
  const double e = std::exp(1.0);
  expect(std::abs(p[0] - e / (e + 1.0)) < 1e-6, "softmax value");
  expect(std::abs(p[0] - 0.7311) < 1e-4, "softmax 0.7311");
  const Vec sharp = class_probabilities(Matrix::identity(2), Vec{1.0, 0.0}, 0.01);
  expect(sharp[0] >= 1.0 - 1e-10, "temperature sharpening");

  expect(std::abs(prediction_entropy(Vec{0.25, 0.25, 0.25, 0.25}) - std::log(4.0)) <
             1e-6,
         "uniform entropy log4");
  const double h_skew = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1));
  expect(std::abs(prediction_entropy(Vec{0.9, 0.1}) - h_skew) < 1e-6,
         "entropy 0.3251");

  const std::vector<Vec> preds{{0.9, 0.1}, {0.5, 0.5}};
  const Vec w = fusion_weights(preds);
  const double e0 = std::exp(-h_skew);
  const double e1 = std::exp(-std::log(2.0));
  expect(std::abs(w[0] - e0 / (e0 + e1)) < 1e-6, "fusion weight");
  expect(std::abs(w[0] - 0.5910) < 1e-4, "fusion 0.5910");
  const Vec fused = fuse_predictions(preds, w);
  expect(std::abs(fused[0] - (w[0] * 0.9 + w[1] * 0.5)) < 1e-12, "fused mixture");

  GlobalBank momentum(0.99);
  momentum.update(Matrix(2, 1, 0.0));
  momentum.update(Matrix(2, 1, 1.0));
  expect(std::abs(momentum.prototype()(0, 0) - 0.01) < 1e-12, "momentum 0.01");

  {  // FIFO on the documented capacities
    LocalBank fifo(2);
    auto mk = [](double v) { return BankEntry::make(Matrix(2, 1, v), {0.5, 0.5}); };
    (void)fifo.enqueue(mk(1));
    (void)fifo.enqueue(mk(2));
    auto ev = fifo.enqueue(mk(3));
    expect(ev && ev->text_features == Matrix(2, 1, 1.0) &&
               fifo.entries()[0].text_features == Matrix(2, 1, 2.0),
           "FIFO eviction");
  }
  {  // top-K selection vs its brute-force statement
    LocalBank bank(8);
    (void)bank.enqueue(BankEntry::make(Matrix(2, 1, 1.0), {0.99, 0.01}));
    (void)bank.enqueue(BankEntry::make(Matrix(2, 1, 2.0), {0.5, 0.5}));
    (void)bank.enqueue(BankEntry::make(Matrix(2, 1, 4.0), {0.9, 0.1}));
    auto top2 = select_hard(bank, 2);
    expect(top2 && (*top2)(0, 0) == 3.0, "top-2 mean");
  }
  {  // evicted-pair compaction
    auto merged = compact_evicted(Matrix::from_rows({{2.0, 4.0}}),
                                  Matrix::from_rows({{4.0, 2.0}}));
    expect(merged && *merged == Matrix::from_rows({{3.0, 3.0}}), "compaction mean");
  }
  {  // text/image encodings
    ToyEncoder enc{Matrix::identity(2), Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})};
    const Vec u = encode_text(enc, Matrix::from_rows({{2.0, 0.0}}), Vec{0.0, 2.0});
    expect(u[0] == 1.0 && u[1] == 1.0, "text mean-pool");
    const Vec v = encode_image(enc, Vec{3.0, 5.0});
    expect(v[0] == 5.0 && v[1] == 3.0, "image map");
  }
  {  // self-consistency loss values
    expect(std::abs(self_loss(Vec{0.5, 0.5}, Vec{0.5, 0.5}) - std::log(2.0)) < 1e-6,
           "self loss log2");
    const Vec probs{e / (e + 1.0), 1.0 / (e + 1.0)};
    const double want = -0.5 * (std::log(probs[0]) + std::log(probs[1]));
    expect(std::abs(self_loss(probs, Vec{0.5, 0.5}) - want) < 1e-6,
           "self loss 0.8133");
  }
  {  // optimizer arithmetic
    TunerConfig cfg;
    PromptState s;
    s.tokens = Matrix(1, 2, 1.0);
    s.m1 = Matrix(1, 2);
    s.m2 = Matrix(1, 2);
    optimizer_step(s, Matrix(1, 2, 0.0), cfg);
    expect(s.tokens(0, 0) == 1.0 * (1.0 - cfg.learning_rate * cfg.weight_decay),
           "decay rescale");
    PromptState t;
    t.tokens = Matrix(1, 2, 0.0);
    t.m1 = Matrix(1, 2);
    t.m2 = Matrix(1, 2);
    TunerConfig no_wd;
    no_wd.weight_decay = 0.0;
    optimizer_step(t, Matrix(1, 2, 1.0), no_wd);
    expect(std::abs(t.tokens(0, 0) + no_wd.learning_rate) < 1e-9, "first adam step");
  }
  {  // noiseless stream emits prototypes bit-exactly
    StreamConfig sc;
    sc.num_classes = 4;
    sc.feature_dim = 8;
    sc.samples_per_domain = 16;
    sc.seed = 42;
    sc.domains = {DomainSpec{Matrix::identity(8), Vec(8, 0.0), 0.0}};
    const Matrix protos = generate_class_prototypes(4, 8, 42);
    bool exact = true;
    for (const StreamSample& s : generate_stream(sc, protos, 0)) {
      for (std::size_t f = 0; f < 8; ++f) {
        exact = exact && s.raw_feature[f] == protos(s.true_class, f);
      }
    }
    expect(exact, "noiseless stream");
  }

  const double secs = elapsed_s(start);
  report(2, "closed-form unit suite", ok && secs < 5.0,
         ok ? fmt("%.2fs (budget 5s)", secs) : why.str());
}

// ---------------------------------------------------------------------------
// 3. Lower entropy must always win a strictly larger fusion weight.
// ---------------------------------------------------------------------------
void criterion_confidence_ordering() {
  Rng rng(777, "acceptance-ordering");
  std::size_t violations = 0;
  const std::size_t pairs = 10000;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t c = 2 + rng.next_below(9);
    Vec a(c), b(c);
    for (double& x : a) x = 3.0 * rng.next_gaussian();
    for (double& x : b) x = 3.0 * rng.next_gaussian();
    const std::vector<Vec> preds{softmax(a), softmax(b)};
    const Vec w = fusion_weights(preds);
    const double ha = prediction_entropy(preds[0]);
    const double hb = prediction_entropy(preds[1]);
    if (ha < hb && !(w[0] > w[1])) ++violations;
    if (hb < ha && !(w[1] > w[0])) ++violations;
  }
  report(3, "confidence ordering", violations == 0,
         fmt("%zu random pairs, %zu violations", pairs, violations));
}

// ---------------------------------------------------------------------------
// 4. Bank semantics against brute-force oracles.
// ---------------------------------------------------------------------------
void criterion_bank_semantics() {
  std::ostringstream why;
  bool ok = true;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) {
      ok = false;
      why << (why.tellp() > 0 ? "; " : "") << what;
    }
  };

  // FIFO contents == reference queue over 10^4 operations.
  {
    Rng rng(31, "acceptance-fifo");
    std::size_t ops = 0;
    while (ops < 10000) {
      const std::size_t capacity = 1 + rng.next_below(12);
      LocalBank bank(capacity);
      testutil::ReferenceQueue<double> ref{capacity, {}};
      const std::size_t burst = 50 + rng.next_below(200);
      for (std::size_t i = 0; i < burst; ++i, ++ops) {
        const double tag = static_cast<double>(ops);
        auto got = bank.enqueue(BankEntry::make(Matrix(2, 1, tag), {0.5, 0.5}));
        auto want = ref.push(tag);
        if (got.has_value() != want.has_value()) {
          expect(false, "FIFO eviction mismatch");
          break;
        }
        if (want && got->text_features != Matrix(2, 1, *want)) {
          expect(false, "FIFO evicted the wrong entry");
          break;
        }
        bool same = bank.size() == ref.items.size();
        for (std::size_t j = 0; same && j < ref.items.size(); ++j) {
          same = bank.entries()[j].text_features == Matrix(2, 1, ref.items[j]);
        }
        if (!same) {
          expect(false, "FIFO contents diverged");
          break;
        }
      }
      if (!ok) break;
    }
  }

  // select_hard == sort-and-average oracle on random banks.
  if (ok) {
    Rng rng(32, "acceptance-hard");
    for (int trial = 0; trial < 300 && ok; ++trial) {
      const std::size_t fill = 1 + rng.next_below(20);
      LocalBank bank(32);
      std::vector<std::pair<double, Matrix>> shadow;  // (entropy, features)
      for (std::size_t i = 0; i < fill; ++i) {
        Vec logits(3);
        for (double& x : logits) x = rng.next_gaussian();
        Vec pred = softmax(logits);
        Matrix m(3, 2);
        for (double& x : m.data()) x = rng.next_gaussian();
        shadow.emplace_back(prediction_entropy(pred), m);
        (void)bank.enqueue(BankEntry::make(std::move(m), std::move(pred)));
      }
      const std::size_t k = 1 + rng.next_below(24);
      std::vector<std::size_t> order(fill);
      for (std::size_t i = 0; i < fill; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return shadow[a].first > shadow[b].first;
      });
      const std::size_t take = std::min(k, fill);
      Matrix oracle = shadow[order[0]].second;
      for (std::size_t i = 1; i < take; ++i) {
        const auto& m = shadow[order[i]].second;
        for (std::size_t j = 0; j < oracle.data().size(); ++j) {
          oracle.data()[j] += m.data()[j];
        }
      }
      for (double& x : oracle.data()) x /= static_cast<double>(take);

      auto got = select_hard(bank, k);
      if (!got) {
        expect(false, "select_hard returned nothing");
        break;
      }
      for (std::size_t j = 0; j < oracle.data().size(); ++j) {
        if (std::abs(got->data()[j] - oracle.data()[j]) > 1e-12) {
          expect(false, "select_hard disagrees with the oracle");
          break;
        }
      }
    }
  }

  // Momentum contraction: distance to a constant input shrinks by gamma.
  if (ok) {
    Rng rng(33, "acceptance-momentum");
    for (int trial = 0; trial < 50 && ok; ++trial) {
      // Keep gamma away from 0 and the chain short: the distance must stay far
      // enough above machine epsilon for the ratio check to be meaningful.
      const double gamma = 0.3 + 0.69 * rng.next_double();
      GlobalBank bank(gamma);
      Matrix seed(3, 2);
      Matrix fresh(3, 2);
      for (double& x : seed.data()) x = rng.next_gaussian();
      for (double& x : fresh.data()) x = rng.next_gaussian();
      bank.update(seed);
      double prev = 0.0;
      for (std::size_t j = 0; j < seed.data().size(); ++j) {
        const double d = seed.data()[j] - fresh.data()[j];
        prev += d * d;
      }
      prev = std::sqrt(prev);
      for (int step = 0; step < 6; ++step) {
        bank.update(fresh);
        double dist = 0.0;
        for (std::size_t j = 0; j < fresh.data().size(); ++j) {
          const double d = bank.prototype().data()[j] - fresh.data()[j];
          dist += d * d;
        }
        dist = std::sqrt(dist);
        if (std::abs(dist / prev - gamma) > 1e-9) {
          expect(false, "contraction factor drifted past 1e-9");
          break;
        }
        prev = dist;
      }
    }
  }

  report(4, "bank semantics vs oracles", ok,
         ok ? "10^4 FIFO ops, 300 top-K banks, 50 momentum chains" : why.str());
}

// ---------------------------------------------------------------------------
// 5. Byte-identical CLI runs inside the runtime budget.
// ---------------------------------------------------------------------------
void criterion_cli_determinism() {
#ifndef HISTPT_CLI_PATH
  report(5, "CLI determinism", false, "CLI path not compiled in");
#else
  const fs::path dir = work_dir();
  const std::string cli = HISTPT_CLI_PATH;
  auto invoke = [&](const std::string& stem) -> double {
    const std::string cmd = "\"" + cli + "\" run --method histpt --seed 42" +
                            " --out \"" + (dir / stem).string() + "\"" +
                            " --trace \"" + (dir / (stem + ".jsonl")).string() +
                            "\" > /dev/null";
    const auto start = Clock::now();
    const int rc = std::system(cmd.c_str());
    const double secs = elapsed_s(start);
    if (rc != 0) return -1.0;
    return secs;
  };

  const double t1 = invoke("first");
  const double t2 = invoke("second");
  if (t1 < 0.0 || t2 < 0.0) {
    report(5, "CLI determinism", false, "CLI invocation failed");
    return;
  }

  bool identical = true;
  std::size_t bytes = 0;
  for (const char* ext : {".csv", ".json", ".jsonl"}) {
    const auto a = slurp(dir / (std::string("first") + ext));
    const auto b = slurp(dir / (std::string("second") + ext));
    identical = identical && !a.empty() && a == b;
    bytes += a.size();
  }
  const bool in_budget = t1 < 30.0 && t2 < 30.0;
  report(5, "CLI determinism", identical && in_budget,
         fmt("100 runs twice: %.2fs and %.2fs (budget 30s each), %zu bytes %s",
             t1, t2, bytes, identical ? "byte-identical" : "DIFFER"));
#endif
}

// ---------------------------------------------------------------------------
// 6-8 share the reference benchmark workbench.
// ---------------------------------------------------------------------------
struct ReferenceResults {
  ExperimentSummary zero_shot;
  ExperimentSummary tpt;
  ExperimentSummary histpt;
};

ReferenceResults run_reference_methods(const Workbench& bench) {
  ReferenceResults r;
  r.zero_shot = run_many(reference_config(MethodKind::zero_shot), bench);
  r.tpt = run_many(reference_config(MethodKind::tpt_baseline), bench);
  r.histpt = run_many(reference_config(MethodKind::histpt), bench);
  return r;
}

void criterion_degradation_curves(const ReferenceResults& r) {
  const std::size_t n = r.tpt.mean_windowed.size();
  if (n == 0 || r.zero_shot.mean_windowed.size() != n ||
      r.histpt.mean_windowed.size() != n) {
    report(6, "forgetting-curve shape", false, "windowed curves missing");
    return;
  }
  const std::size_t third = n / 3;
  const double tpt_first = 100.0 * mean_over(r.tpt.mean_windowed, 0, third);
  const double tpt_final = 100.0 * mean_over(r.tpt.mean_windowed, n - third, n);
  const double zs_final = 100.0 * mean_over(r.zero_shot.mean_windowed, n - third, n);
  const double hp_final = 100.0 * mean_over(r.histpt.mean_windowed, n - third, n);
  const double zs_mean = 100.0 * r.zero_shot.mean_accuracy;
  const double tpt_mean = 100.0 * r.tpt.mean_accuracy;
  const double hp_mean = 100.0 * r.histpt.mean_accuracy;

  const bool a_drop = tpt_first - tpt_final >= kPinTptSelfDropPoints &&
                      tpt_first > tpt_final;
  const bool a_below = zs_final - tpt_final >= kPinTptBelowZeroShotPoints &&
                       tpt_final < zs_final;
  const bool b_over_zs = hp_mean - zs_mean >= kPinHistptOverZeroShotPoints &&
                         hp_mean > zs_mean;
  const bool b_over_tpt = hp_mean - tpt_mean >= kPinHistptOverTptPoints &&
                          hp_mean > tpt_mean;
  const bool c_hold = hp_final - zs_final >= kPinHistptFinalVsZeroShotPoints;

  const auto tag = [](bool ok) { return ok ? "ok" : "FAIL"; };
  report(6, "forgetting-curve shape",
         a_drop && a_below && b_over_zs && b_over_tpt && c_hold,
         fmt("(a) tpt %.2f->%.2f [%s], vs zs final %.2f [%s]; "
             "(b) means histpt %.2f vs tpt %.2f [%s], vs zs %.2f [%s]; "
             "(c) final histpt %.2f vs zs %.2f, tolerance 1.0 [%s]",
             tpt_first, tpt_final, tag(a_drop), zs_final, tag(a_below),
             hp_mean, tpt_mean, tag(b_over_tpt), zs_mean, tag(b_over_zs),
             hp_final, zs_final, tag(c_hold)));
}

void criterion_ablation(const ReferenceResults& r, const Workbench& bench) {
  const std::vector<AblationRow> rows =
      run_ablation(reference_config(MethodKind::histpt), bench);
  bool ok = rows.size() == 9;
  std::ostringstream why;
  if (!ok) why << "expected 9 rows, got " << rows.size();

  if (ok && rows[0].mean_accuracy != r.zero_shot.mean_accuracy) {
    ok = false;
    why << "all-off row differs from zero-shot";
  }

  double worst_margin = 1e9;
  if (ok) {
    const double full = rows[8].mean_accuracy * 100.0;
    for (std::size_t i = 1; i <= 3; ++i) {  // the single-bank rows
      worst_margin = std::min(worst_margin, full - rows[i].mean_accuracy * 100.0);
    }
    if (worst_margin < -0.5) {
      ok = false;
      why << "full config trails a single bank by " << -worst_margin << " points";
    }
  }

  std::ostringstream table;
  for (const AblationRow& row : rows) {
    table << " " << row.label << "=" << fmt("%.2f", row.mean_accuracy * 100.0);
  }
  report(7, "bank ablation matrix", ok,
         ok ? fmt("worst full-vs-single margin %+.2f points;%s", worst_margin,
                  table.str().c_str())
            : why.str());
}

void criterion_fixed_orders(const Workbench& bench) {
  bool ok = true;
  std::ostringstream detail;
  double min_delta = 1e9;
  for (const std::vector<int>& order : {std::vector<int>{0, 1, 2},
                                        std::vector<int>{2, 1, 0}}) {
    ExperimentConfig zs = reference_config(MethodKind::zero_shot);
    zs.stream.runs = 1;
    zs.fixed_order = order;
    ExperimentConfig hp = reference_config(MethodKind::histpt);
    hp.stream.runs = 1;
    hp.fixed_order = order;

    const ExperimentSummary zs_sum = run_many(zs, bench);
    const ExperimentSummary hp_sum = run_many(hp, bench);

    detail << (order[0] == 0 ? " normal->adverse:" : " adverse->normal:");
    for (const auto& [domain, zs_acc] : zs_sum.per_domain_mean) {
      const double delta =
          (hp_sum.per_domain_mean.at(domain) - zs_acc) * 100.0;
      min_delta = std::min(min_delta, delta);
      detail << " d" << domain << format_signed_delta(delta);
      if (delta < kPinFixedOrderMinDeltaPoints - 1e-9) ok = false;
    }
  }
  report(8, "fixed-order domain protocol", ok,
         fmt("min per-domain delta %+.2f points;%s", min_delta,
             detail.str().c_str()));
}

// ---------------------------------------------------------------------------
// 9. Embedding file round trips.
// ---------------------------------------------------------------------------
void criterion_roundtrip() {
  const fs::path dir = work_dir();
  Rng rng(99, "acceptance-io");
  std::vector<StreamSample> samples;
  const std::uint32_t C = 10, D = 32;
  for (std::size_t i = 0; i < 1000; ++i) {
    StreamSample s;
    s.index = i;
    s.true_class = static_cast<int>(rng.next_below(C));
    s.domain_id = static_cast<int>(rng.next_below(3));
    s.raw_feature.resize(D);
    for (double& x : s.raw_feature) {
      x = static_cast<double>(static_cast<float>(rng.next_gaussian()));
    }
    samples.push_back(std::move(s));
  }

  const fs::path bin = dir / "roundtrip.bin";
  const fs::path bin2 = dir / "roundtrip2.bin";
  const fs::path jsonl = dir / "roundtrip.jsonl";
  write_embeddings_binary(bin.string(), C, D, samples);
  const EmbeddingStream loaded = load_embedding_stream(bin.string());

  bool ok = loaded.num_classes == C && loaded.feature_dim == D &&
            loaded.samples.size() == samples.size();
  for (std::size_t i = 0; ok && i < samples.size(); ++i) {
    ok = loaded.samples[i].true_class == samples[i].true_class &&
         loaded.samples[i].domain_id == samples[i].domain_id &&
         loaded.samples[i].raw_feature == samples[i].raw_feature;  // bit-exact
  }

  if (ok) {
    write_embeddings_binary(bin2.string(), C, D, loaded.samples);
    ok = slurp(bin) == slurp(bin2);
  }

  if (ok) {
    write_embeddings_jsonl(jsonl.string(), D, samples);
    const EmbeddingStream alt = load_embedding_stream(jsonl.string());
    ok = alt.samples.size() == samples.size();
    for (std::size_t i = 0; ok && i < samples.size(); ++i) {
      ok = alt.samples[i].true_class == loaded.samples[i].true_class &&
           alt.samples[i].domain_id == loaded.samples[i].domain_id &&
           alt.samples[i].raw_feature == loaded.samples[i].raw_feature;
    }
  }

  report(9, "embedding round trip", ok,
         "1000 records: binary bit-exact, bytes stable, JSONL identical");
}

}  // namespace

int main() {
  criterion_gradients();
  criterion_closed_form();
  criterion_confidence_ordering();
  criterion_bank_semantics();
  criterion_cli_determinism();

  const ExperimentConfig ref = reference_config(MethodKind::histpt);
  const Workbench bench = make_workbench(ref.stream, ref.tuner);
  const ReferenceResults results = run_reference_methods(bench);
  criterion_degradation_curves(results);
  criterion_ablation(results, bench);
  criterion_fixed_orders(bench);

  criterion_roundtrip();

  std::printf("%s\n", g_failures == 0 ? "all criteria passed"
                                      : "ACCEPTANCE FAILURES PRESENT");
  return g_failures == 0 ? 0 : 1;
}
