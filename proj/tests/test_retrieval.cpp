#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "histpt/core_math.hpp"
#include "histpt/errors.hpp"
#include "histpt/retrieval.hpp"

using namespace histpt;

namespace {

Matrix proto2(double a, double b, double c, double d) {
  return Matrix::from_rows({{a, b}, {c, d}});
}

const Vec kImage{1.0, 0.0};
constexpr double kTau = 0.5;

}  // namespace

TEST_CASE("bank prediction is the prototype-row cosine classifier") {
  const Matrix proto = proto2(1.0, 0.0, 0.0, 1.0);
  const Vec p = bank_prediction(proto, kImage, 1.0);
  const double e = std::exp(1.0);
  CHECK(p[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));
}

TEST_CASE("bank prediction names the class with a dead prototype row") {
  const Matrix proto = proto2(1.0, 0.0, 0.0, 0.0);
  try {
    (void)bank_prediction(proto, kImage, 1.0);
    FAIL("expected DegenerateInputError");
  } catch (const DegenerateInputError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("retrieval with no usable source returns the raw prediction") {
  const Vec raw{0.8, 0.2};

  BankPrototypes empty;
  PredictionBundle cold = retrieve(empty, kImage, raw, kTau);
  CHECK(cold.sources.empty());
  CHECK(cold.per_bank.empty());
  CHECK(cold.weights.empty());
  CHECK(cold.fused == raw);  // bit-equal fallback
  CHECK(cold.raw == raw);

  BankPrototypes full;
  full.local = proto2(1.0, 0.0, 0.0, 1.0);
  RetrievalOptions off;
  off.use_local = off.use_hard = off.use_global = false;
  PredictionBundle gated = retrieve(full, kImage, raw, kTau, off);
  CHECK(gated.sources.empty());
  CHECK(gated.fused == raw);
}

TEST_CASE("sources appear in bank order and honor the gates") {
  BankPrototypes protos;
  protos.local = proto2(1.0, 0.0, 0.0, 1.0);
  protos.hard = proto2(0.8, 0.2, 0.1, 0.9);
  protos.global = proto2(0.6, 0.4, 0.4, 0.6);
  const Vec raw{0.5, 0.5};

  PredictionBundle all = retrieve(protos, kImage, raw, kTau);
  CHECK(all.sources == std::vector<std::string>{"local", "hard", "global"});
  REQUIRE(all.per_bank.size() == 3);
  REQUIRE(all.weights.size() == 3);

  RetrievalOptions no_hard;
  no_hard.use_hard = false;
  PredictionBundle two = retrieve(protos, kImage, raw, kTau, no_hard);
  CHECK(two.sources == std::vector<std::string>{"local", "global"});

  BankPrototypes only_cold = protos;
  only_cold.local.reset();
  only_cold.global.reset();
  PredictionBundle one = retrieve(only_cold, kImage, raw, kTau);
  CHECK(one.sources == std::vector<std::string>{"hard"});
  CHECK(one.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.fused == one.per_bank[0]);
}

TEST_CASE("per-bank predictions and fusion wire through unchanged") {
  BankPrototypes protos;
  protos.local = proto2(1.0, 0.0, 0.0, 1.0);
  protos.global = proto2(0.3, 0.7, 0.7, 0.3);
  const Vec raw{0.5, 0.5};

  PredictionBundle bundle = retrieve(protos, kImage, raw, kTau);
  REQUIRE(bundle.per_bank.size() == 2);
  CHECK(bundle.per_bank[0] == bank_prediction(*protos.local, kImage, kTau));
  CHECK(bundle.per_bank[1] == bank_prediction(*protos.global, kImage, kTau));
  CHECK(bundle.weights == fusion_weights(bundle.per_bank));
  CHECK(bundle.fused == fuse_predictions(bundle.per_bank, bundle.weights));
  CHECK(bundle.raw == raw);
}

TEST_CASE("uniform weighting replaces the entropy weighting when disabled") {
  BankPrototypes protos;
  protos.local = proto2(1.0, 0.0, 0.0, 1.0);   // confident at tau=0.5
  protos.global = proto2(0.6, 0.4, 0.5, 0.5);  // mushier
  const Vec raw{0.5, 0.5};

  PredictionBundle adaptive = retrieve(protos, kImage, raw, kTau);
  CHECK(adaptive.weights[0] > adaptive.weights[1]);

  RetrievalOptions uniform;
  uniform.adaptive_weights = false;
  PredictionBundle flat = retrieve(protos, kImage, raw, kTau, uniform);
  CHECK(flat.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(flat.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(flat.fused[0] ==
        doctest::Approx(0.5 * (flat.per_bank[0][0] + flat.per_bank[1][0]))
            .epsilon(1e-12));
}

TEST_CASE("single-source fusion ignores the adaptive switch") {
  BankPrototypes protos;
  protos.local = proto2(1.0, 0.0, 0.0, 1.0);
  const Vec raw{0.5, 0.5};

  RetrievalOptions uniform;
  uniform.adaptive_weights = false;
  PredictionBundle a = retrieve(protos, kImage, raw, kTau);
  PredictionBundle b = retrieve(protos, kImage, raw, kTau, uniform);
  CHECK(a.fused == b.fused);  // weight is 1 either way
  CHECK(a.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
}
