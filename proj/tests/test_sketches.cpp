#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "indep/errors.hpp"
#include "indep/sketch_engine.hpp"
#include "indep/sketches.hpp"
#include "support.hpp"

namespace indep {
namespace {

using test::mask_of;
using test::Rng;

// Substituted coefficients C_{1,1} = 1, C_{1,2} = 2, C_{2,1} = 1, C_{2,2} = 3.
double probe(std::size_t family, std::uint32_t v) {
  static const double c[2][2] = {{1, 2}, {1, 3}};
  return c[family - 1][v - 1];
}

TEST(ProductSketch, SingleUpdateRules) {
  BasicProductSketch<double> sk({2, 2, 0, 0}, {}, probe);
  const std::uint32_t t[] = {1, 1};
  sk.update(t);
  EXPECT_EQ(sk.joint(), probe(1, 1) * probe(2, 1));
  EXPECT_EQ(sk.margins()[0], probe(1, 1));
  EXPECT_EQ(sk.margins()[1], probe(2, 1));
  EXPECT_EQ(sk.value(), 0.0);
}

TEST(ProductSketch, EmptyHasZeroAccumulatorsAndNoValue) {
  BasicProductSketch<double> sk({2, 2, 1, 0}, {ZeroOneHash::ones()}, probe);
  EXPECT_EQ(sk.joint(), 0.0);
  EXPECT_EQ(sk.margins(), std::vector<double>(2, 0.0));
  EXPECT_THROW(sk.value(), EmptyStream);
}

TEST(ProductSketch, CoefficientIdentityOnDiagonalPair) {
  BasicProductSketch<double> sk({2, 2, 0, 0}, {}, probe);
  const std::uint32_t a[] = {1, 1}, b[] = {2, 2};
  sk.update(a);
  sk.update(b);
  // 2 (1*1 + 2*3) - (1 + 2)(1 + 3), against M_Ind entries (1, -1, -1, 1).
  EXPECT_EQ(sk.value(), 2.0);
  const auto table = build_frequency_table(TupleStream(StreamShape{2, 2}, {{1, 1}, {2, 2}}));
  EXPECT_EQ(test::coefficient_expansion<double>(table, 0, {}, probe), 2.0);
}

TEST(ProductSketch, CoefficientIdentityExactAllShapes) {
  Rng rng(41);
  std::uniform_int_distribution<long long> num(-50, 50), den(1, 20);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 2 + trial % 2, n = 2 + trial % 3;
    const auto stream = test::random_stream(rng, k, n, 1 + trial % 8);
    const auto table = build_frequency_table(stream);
    for (std::size_t s = 0; s <= k; ++s) {
      for (std::size_t sp = 0; sp <= s && sp < k; ++sp) {
        std::vector<ZeroOneHash> hashes;
        for (std::size_t j = 0; j < s; ++j) hashes.push_back(test::random_mask(rng, n));
        std::vector<std::vector<Rational>> c(k - sp, std::vector<Rational>(n));
        for (auto& row : c)
          for (auto& x : row) x = Rational(num(rng), den(rng));
        auto coef = [&](std::size_t f, std::uint32_t v) { return c[f - 1][v - 1]; };
        BasicProductSketch<Rational> sk({k, n, s, sp}, hashes, coef);
        for (std::size_t i = 0; i < stream.size(); ++i) sk.update(stream[i]);
        EXPECT_EQ(sk.value(), test::coefficient_expansion<Rational>(table, sp, hashes, coef))
            << "k=" << k << " s=" << s << " s'=" << sp;
      }
    }
  }
}

TEST(ProductSketch, AnnihilatingMaskGivesZero) {
  Rng rng(2);
  const auto stream = test::clustered_stream(rng, 2, 4, 30, 3);
  const SketchShape shape{2, 4, 1, 1};
  ProductSketchState st(shape, {ZeroOneHash::zeros()}, product_cauchy_families(9, 0, 1, 0));
  auto src = stream.source();
  st.consume(src);
  EXPECT_EQ(st.value(), 0.0);
}

TEST(ProductSketch, ShapeValidation) {
  EXPECT_THROW(SketchShape({2, 2, 1, 2}).validate(), ConfigError);
  EXPECT_THROW(SketchShape({2, 2, 2, 2}).validate(), ConfigError);
  EXPECT_THROW(ProductSketchState({2, 2, 1, 0}, {}, product_cauchy_families(1, 0, 2, 0)), ConfigError);
  BasicProductSketch<double> sk({2, 2, 0, 0}, {}, probe);
  const std::uint32_t bad[] = {3, 1};
  EXPECT_THROW(sk.update(bad), MalformedInput);
}

ProductSketchState sketch_of(const TupleStream& s, const SketchShape& shape, const std::vector<ZeroOneHash>& h,
                             std::uint64_t seed) {
  ProductSketchState st(shape, h, product_cauchy_families(seed, 0, shape.families(), 100.0 * shape.k * shape.n));
  auto src = s.source();
  st.consume(src);
  return st;
}

void expect_same_state(const ProductSketchState& a, const ProductSketchState& b) {
  EXPECT_EQ(a.m_seen(), b.m_seen());
  EXPECT_NEAR(a.joint(), b.joint(), 1e-9 * (1 + std::abs(a.joint())));
  for (std::size_t j = 0; j < a.margins().size(); ++j)
    EXPECT_NEAR(a.margins()[j], b.margins()[j], 1e-9 * (1 + std::abs(a.margins()[j])));
}

TEST(ProductSketch, MergeIsLinearCommutativeAssociative) {
  Rng rng(13);
  const SketchShape shape{3, 3, 2, 1};
  const std::vector<ZeroOneHash> h = {test::random_mask(rng, 3), test::random_mask(rng, 3)};
  for (int trial = 0; trial < 10; ++trial) {
    const auto d1 = test::random_stream(rng, 3, 3, 5), d2 = test::random_stream(rng, 3, 3, 7),
               d3 = test::random_stream(rng, 3, 3, 4);
    TupleStream all = d1;
    all.append(d2).append(d3);
    const auto a = sketch_of(d1, shape, h, 5), b = sketch_of(d2, shape, h, 5), c = sketch_of(d3, shape, h, 5);
    const auto whole = sketch_of(all, shape, h, 5);
    expect_same_state(merge(merge(a, b), c), whole);
    expect_same_state(merge(a, merge(b, c)), whole);
    expect_same_state(merge(b, a), merge(a, b));
    const auto empty = sketch_of(TupleStream(StreamShape{3, 3}), shape, h, 5);
    expect_same_state(merge(a, empty), a);
  }
}

TEST(ProductSketch, MergeRejectsDifferentRandomness) {
  const auto s = TupleStream(StreamShape{2, 2}, {{1, 2}});
  const SketchShape shape{2, 2, 1, 0};
  const auto a = sketch_of(s, shape, {ZeroOneHash::ones()}, 1);
  EXPECT_THROW(merge(a, sketch_of(s, shape, {ZeroOneHash::ones()}, 2)), MergeIncompatible);
  EXPECT_THROW(merge(a, sketch_of(s, shape, {ZeroOneHash::zeros()}, 1)), MergeIncompatible);
}

TEST(ProductSketch, SnapshotRoundTrip) {
  Rng rng(17);
  const auto s = test::random_stream(rng, 2, 5, 40);
  const SketchShape shape{2, 5, 1, 0};
  const auto a = sketch_of(s, shape, {ZeroOneHash::threshold(PairwiseHashFamily::zero_one(4, 5, 0.5))}, 3);
  const auto j = a.snapshot();
  EXPECT_EQ(j.at("format"), "indep.product_sketch");
  EXPECT_EQ(j.at("version"), ProductSketchState::kSnapshotVersion);
  const auto b = ProductSketchState::restore(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(a.compatible(b));
  EXPECT_EQ(a.joint(), b.joint());
  EXPECT_EQ(a.margins(), b.margins());
  EXPECT_EQ(a.value(), b.value());
  auto bad = j;
  bad["version"] = 99;
  EXPECT_THROW(ProductSketchState::restore(bad), MalformedInput);
  EXPECT_THROW(ProductSketchState::restore(nlohmann::json{{"format", "other"}}), MalformedInput);
}

TEST(ProductSketch, OrderInvariant) {
  Rng rng(23);
  auto s = test::random_stream(rng, 2, 6, 50);
  std::vector<std::vector<std::uint32_t>> t;
  for (std::size_t i = 0; i < s.size(); ++i) t.emplace_back(s[i].begin(), s[i].end());
  std::reverse(t.begin(), t.end());
  TupleStream r(s.shape());
  for (const auto& x : t) r.push_back(x);
  const SketchShape shape{2, 6, 0, 0};
  const auto a = sketch_of(s, shape, {}, 8), b = sketch_of(r, shape, {}, 8);
  EXPECT_NEAR(a.value(), b.value(), 1e-9 * (1 + std::abs(a.value())));
}

TEST(EpsilonEstimate, MaskedRowOfDiagonalPair) {
  // Row 1 of M_Ind for [(1,1),(2,2)] is (1, -1), so |T_1(W(M_Ind, H))| = 2 for H = (1, 0).
  const TupleStream s(StreamShape{2, 2}, {{1, 1}, {2, 2}});
  const auto table = build_frequency_table(s);
  const ZeroOneHash h[] = {mask_of({1, 0})};
  const double target = l1_norm_double(suffix_sum(prefix_zero(dense_independence_tensor(table), h), 1));
  ASSERT_EQ(target, 2.0);
  const double eps = 0.1, delta = 0.05;
  const std::size_t reps = epsilon_repetitions(eps, delta);
  int ok = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    SketchBank bank({2, 2, 1, 1}, {h[0]}, reps, trial, SketchPurpose::kEpsilon, 400);
    auto src = s.source();
    bank.consume(src);
    const double e = epsilon_l1_estimate(bank, eps, delta);
    ok += std::abs(e - target) <= eps * target;
  }
  EXPECT_GE(ok, 90);
}

TEST(EpsilonEstimate, ZeroTargets) {
  const TupleStream s(StreamShape{2, 2}, {{1, 1}, {2, 2}});
  SketchBank zero({2, 2, 1, 1}, {ZeroOneHash::zeros()}, 100, 1, SketchPurpose::kEpsilon, 400);
  auto src = s.source();
  zero.consume(src);
  for (double v : zero.absolute_values()) EXPECT_EQ(v, 0.0);
  const TupleStream single(StreamShape{2, 3}, {{2, 3}});
  SketchBank one({2, 3, 1, 1}, {ZeroOneHash::ones()}, 100, 1, SketchPurpose::kEpsilon, 600);
  auto src1 = single.source();
  one.consume(src1);
  EXPECT_EQ(epsilon_l1_estimate(one, 0.5, 0.5, 8.0), 0.0);
}

TEST(EpsilonEstimate, RepetitionContract) {
  EXPECT_EQ(epsilon_repetitions(0.1, 0.05), static_cast<std::size_t>(std::ceil(8 / 0.01 * std::log(20.0))));
  SketchBank small({2, 2, 1, 1}, {ZeroOneHash::ones()}, 10, 1, SketchPurpose::kEpsilon, 400);
  const std::uint32_t t[] = {1, 2};
  small.update(t);
  EXPECT_THROW(epsilon_l1_estimate(small, 0.1, 0.05), ConfigError);
  EXPECT_THROW(SketchBank({2, 2, 1, 0}, {ZeroOneHash::ones()}, 10, 1, SketchPurpose::kEpsilon, 400), ConfigError);
  SketchBank poly({2, 2, 1, 0}, {ZeroOneHash::ones()}, 10, 1, SketchPurpose::kPolylog, 400);
  poly.update(t);
  EXPECT_THROW(polylog_l1_estimate(poly, 0.05), ConfigError);
  EXPECT_THROW(epsilon_l1_estimate(poly, 0.5, 0.5), ConfigError);
}

TEST(PolylogEstimate, ZeroTargetAndFullSketch) {
  const TupleStream s(StreamShape{2, 4}, {{1, 1}, {2, 3}, {1, 1}});
  const std::size_t reps = polylog_repetitions(0.05);
  SketchBank zero({2, 4, 1, 0}, {ZeroOneHash::zeros()}, reps, 4, SketchPurpose::kPolylog, 800);
  SketchBank full({2, 4, 0, 0}, {}, reps, 4, SketchPurpose::kPolylog, 800);
  auto a = s.source();
  zero.consume(a);
  auto b = s.source();
  full.consume(b);
  EXPECT_EQ(polylog_l1_estimate(zero, 0.05), 0.0);
  const double target = l1_norm_double(dense_independence_tensor(build_frequency_table(s)));
  const double beta = polylog_beta(4, 2);
  const double e = polylog_l1_estimate(full, 0.05);
  EXPECT_GE(e, target / beta);
  EXPECT_LE(e, target * beta);
}

TEST(Median, Conventions) {
  EXPECT_EQ(median({}), 0.0);
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(polylog_beta(2, 2), 4.0);
  EXPECT_EQ(polylog_beta(16, 2), 16.0);
}

TEST(SketchEngine, MatchesSketchBanks) {
  Rng rng(29);
  const std::size_t k = 3, n = 4, reps = 6;
  const auto s = test::clustered_stream(rng, k, n, 60, 5);
  SketchEngine engine({k, n}, {{1, 0, reps}, {2, 1, reps}, {2, 2, reps}, {0, 0, reps}}, {77, 0, 1u << 20});
  auto src = s.source();
  EXPECT_EQ(engine.consume(src), 60u);
  EXPECT_EQ(engine.m(), 60u);
  EXPECT_EQ(engine.omega(), default_truncation(k, n));
  for (std::size_t kind = 0; kind < engine.kinds().size(); ++kind) {
    const auto& kd = engine.kinds()[kind];
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<ZeroOneHash> chain;
      for (std::size_t j = 0; j < kd.s; ++j) chain.push_back(test::random_mask(rng, n));
      SketchBank bank({k, n, kd.s, kd.s_prime}, chain, reps, engine.kind_seed(kind), SketchPurpose::kPolylog,
                      engine.omega());
      auto src2 = s.source();
      bank.consume(src2);
      const auto ev = engine.values(kind, chain);
      ASSERT_EQ(ev.size(), reps);
      for (std::size_t r = 0; r < reps; ++r) {
        const double bv = bank.states()[r].value();
        EXPECT_NEAR(ev[r], bv, 1e-7 * (1 + std::abs(bv))) << "kind " << kind << " rep " << r;
      }
    }
  }
}

TEST(SketchEngine, BudgetAndShapeErrors) {
  EXPECT_THROW(SketchEngine({3, 100}, {{2, 2, 1000}}, {1, 0, 1000}), BudgetExceeded);
  SketchEngine e({2, 2}, {{1, 1, 4}}, {1, 0, 1u << 20});
  const ZeroOneHash chain[] = {ZeroOneHash::ones()};
  EXPECT_THROW(e.values(0, chain), EmptyStream);
  TupleStream other(StreamShape{3, 2}, {{1, 1, 1}});
  auto src = other.source();
  EXPECT_THROW(e.consume(src), ConfigError);
}

}  // namespace
}  // namespace indep
