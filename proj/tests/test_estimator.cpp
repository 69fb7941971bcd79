#include <gtest/gtest.h>

#include <cmath>

#include "indep/errors.hpp"
#include "indep/estimator.hpp"
#include "indep/pipeline.hpp"
#include "support.hpp"

namespace indep {
namespace {

using test::mask_of;
using test::Rng;

TEST(SplitCompare, Examples) {
  const std::vector<double> v = {1, 1, 1, 1};
  EXPECT_EQ(split_compare_ratio(v, mask_of({1, 1, 0, 0})), std::make_pair(2.0, 2.0));
  const std::vector<double> w = {10, 0, 0, 0};
  EXPECT_EQ(split_compare_ratio(w, mask_of({1, 0, 1, 0})), std::make_pair(10.0, 0.0));
  const std::vector<double> neg = {1, -1};
  EXPECT_THROW(split_compare_ratio(neg, ZeroOneHash::ones()), DomainError);
}

TEST(TournamentConfig, FormulaInvariants) {
  for (double eps : {0.05, 0.2, 0.5, 0.9}) {
    const auto c = TournamentConfig::from_paper(eps, 0.1, 4.0);
    EXPECT_NEAR(c.p, 1 - std::sqrt(1 - eps / 2), 1e-15);
    EXPECT_EQ(c.rounds, static_cast<std::size_t>(std::ceil(std::log(10.0) / c.p)));
    EXPECT_GE(c.lambda, 1.0);
    EXPECT_NEAR(c.lambda_prime, (1 + eps) * c.lambda, 1e-9);
    EXPECT_NEAR(c.alpha, eps / (64 * 16), 1e-15);
    EXPECT_GT(c.alpha, 0);
    EXPECT_LT(c.alpha, 1);
    EXPECT_GE(c.rounds, 1u);
  }
  const auto half = TournamentConfig::from_paper(0.5, 0.1, 1.0);
  const double r = std::pow(0.5, 0.25);
  EXPECT_NEAR(half.lambda, 1 + 2 * r / (1 - r), 1e-12);
  EXPECT_THROW(TournamentConfig::from_paper(0.0, 0.1, 1.0), ConfigError);
  EXPECT_THROW(TournamentConfig::from_paper(0.1, 0.1, 0.5), ConfigError);
}

DenseTensor dominant_tensor() {
  // Row 1 carries 10000 of a total 10002.
  DenseTensor m(2, 8);
  const std::uint32_t a[] = {1, 1}, b[] = {1, 2}, c[] = {4, 3}, d[] = {7, 8};
  m.at(a) = 6000;
  m.at(b) = -4000;
  m.at(c) = 1;
  m.at(d) = -1;
  return m;
}

TEST(Tournament, DominantHyperplaneIsApproximated) {
  const auto m = dominant_tensor();
  const auto subs = exact_sub_algorithms(m, 2.0);
  const double eps = 0.1;
  const auto cfg = TournamentConfig::from_paper(eps, 0.1, 2.0);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double u = tensor_tournament(ZeroOneHash::ones(), cfg, subs, seed, 8);
    ok += std::abs(u - 10000) <= 3 * eps * 10000;
  }
  EXPECT_GE(ok, 95);
}

TEST(Tournament, ZeroMaskedVectorGivesZero) {
  const auto subs = exact_sub_algorithms(DenseTensor(2, 8), 1.0);
  const auto cfg = TournamentConfig::from_paper(0.2, 0.1, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(tensor_tournament(ZeroOneHash::ones(), cfg, subs, seed, 8), 0.0);
  const auto dom = exact_sub_algorithms(dominant_tensor(), 1.0);
  EXPECT_EQ(tensor_tournament(ZeroOneHash::zeros(), cfg, dom, 3, 8), 0.0);
}

TEST(Tournament, UniformVectorGivesZero) {
  DenseTensor m(2, 64);
  for (std::uint32_t i = 1; i <= 64; ++i) {
    const std::uint32_t idx[] = {i, i};
    m.at(idx) = i % 2 ? 1 : -1;
  }
  const auto subs = exact_sub_algorithms(m, 1.0);
  const auto cfg = TournamentConfig::from_paper(0.1, 0.1, 1.0);
  int zeros = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) zeros += tensor_tournament(ZeroOneHash::ones(), cfg, subs, seed, 64) == 0;
  EXPECT_GE(zeros, 90);
}

TEST(Tournament, ReductionVariantsAndTrace) {
  const auto subs = exact_sub_algorithms(dominant_tensor(), 1.0);
  auto cfg = TournamentConfig::from_paper(0.2, 0.1, 1.0);
  std::vector<TournamentRound> trace;
  const double u = tensor_tournament(ZeroOneHash::ones(), cfg, subs, 9, 8, &trace);
  EXPECT_EQ(trace.size(), cfg.rounds);
  double lo = INFINITY;
  for (const auto& r : trace) lo = std::min(lo, r.u_prime);
  EXPECT_EQ(u, lo);
  cfg.reduction = RoundReduction::kMinPositive;
  EXPECT_GT(tensor_tournament(ZeroOneHash::ones(), cfg, subs, 9, 8), 0.0);
}

TEST(Tournament, SubcallFailureNamesRound) {
  SubAlgorithms subs;
  subs.approx_A = [](const ZeroOneHash&, double) -> double { throw BudgetExceeded("boom"); };
  subs.approx_B = [](const ZeroOneHash&, double, double) { return 1.0; };
  try {
    tensor_tournament(ZeroOneHash::ones(), TournamentConfig::from_paper(0.2, 0.1, 1.0), subs, 1, 4);
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("tournament round 0"), std::string::npos);
  }
}

TEST(Cover, ZeroVectorIsEmpty) {
  const auto subs = exact_sub_algorithms(DenseTensor(2, 6), 1.0);
  const auto tc = TournamentConfig::from_paper(0.3, 0.1, 1.0);
  const ThresholdMax tmax = [&](const ZeroOneHash& h, std::uint64_t s) { return tensor_tournament(h, tc, subs, s, 6); };
  EXPECT_TRUE(cover_algorithm(ZeroOneHash::ones(), CoverConfig::with_buckets(0.3, 0.1, tc.alpha, 64), tmax, 1, 6).empty());
}

TEST(Cover, TwoSignificantEntries) {
  DenseTensor m(2, 16);
  auto set = [&](std::uint32_t i, std::uint32_t j, std::int64_t v) {
    const std::uint32_t idx[] = {i, j};
    m.at(idx) = v;
  };
  set(1, 1, 200);
  set(1, 2, -200);
  set(2, 3, -300);
  set(2, 4, 100);
  for (std::uint32_t r = 3; r <= 16; ++r) {
    set(r, 1, 7);
    set(r, 5, -7);
  }
  const auto subs = exact_sub_algorithms(m, 1.0);
  const double eps = 0.3;
  const auto tc = TournamentConfig::from_paper(eps, 0.1, 1.0);
  const ThresholdMax tmax = [&](const ZeroOneHash& h, std::uint64_t s) { return tensor_tournament(h, tc, subs, s, 16); };
  const auto cc = CoverConfig::with_buckets(eps, 0.1, tc.alpha, 1024);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    int hits = 0;
    for (const auto& out : cover_algorithm(ZeroOneHash::ones(), cc, tmax, seed, 16))
      hits += std::abs(out.value - 400) <= eps * 400;
    ok += hits == 2;
  }
  EXPECT_GE(ok, 90);
}

TEST(Cover, SingleBucketIsOneThresholdMaxCall) {
  const auto subs = exact_sub_algorithms(dominant_tensor(), 1.0);
  const auto tc = TournamentConfig::from_paper(0.2, 0.1, 1.0);
  int calls = 0;
  const ThresholdMax tmax = [&](const ZeroOneHash& h, std::uint64_t s) {
    ++calls;
    return tensor_tournament(h, tc, subs, s, 8);
  };
  const auto out = cover_algorithm(ZeroOneHash::ones(), CoverConfig::with_buckets(0.2, 0.1, tc.alpha, 1), tmax, 4, 8);
  EXPECT_EQ(calls, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].bucket, 1u);
  EXPECT_NEAR(out[0].value, 10000, 0.2 * 10000);
}

TEST(LayerConfig, FormulasAndFChi) {
  const auto c = LayerConfig::from_paper(0.1, 100, 1e6);
  EXPECT_GE(c.zeta, c.epsilon / (2.0 * c.Q));
  EXPECT_NEAR(c.zeta, std::pow(1 + c.epsilon, 1.0 / c.Q) - 1, 1e-15);
  EXPECT_NEAR(c.chi_prime, 10.0 * (c.levels + c.layers), 1e-9);
  EXPECT_EQ(c.levels, static_cast<std::size_t>(std::ceil(std::log(100.0) / std::log(1.1))));
  EXPECT_EQ(c.f_chi(c.chi * 1.1), 1);
  EXPECT_EQ(c.f_chi(2 * c.chi), 8);
  EXPECT_EQ(c.f_chi(c.chi * std::pow(1.1, 5)), 5);
  EXPECT_THROW(c.f_chi(c.chi), DomainError);
  for (double x : {1.0001, 1.5, 3.0, 1e3}) EXPECT_GT(c.f_chi(c.chi * x), 0);
  auto s = LayerConfig::from_paper(0.1, 100, 1e6, 1e-3);
  EXPECT_LT(s.chi, c.chi);
  s.set_chi_q(64, 16);
  EXPECT_EQ(s.chi, 64);
  EXPECT_EQ(s.Q, 16u);
  EXPECT_NEAR(s.zeta, std::pow(1.1, 1.0 / 16) - 1, 1e-15);
}

CoverFn exact_cover(const std::vector<double>& v) {
  return [v](const ZeroOneHash& mask, std::uint64_t) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] > 0 && mask(i + 1)) out.push_back(v[i]);
    return out;
  };
}

TEST(Layered, ZeroAndSingleEntry) {
  auto cfg = LayerConfig::from_paper(0.1, 4, 100).set_chi_q(64, 16);
  EXPECT_EQ(layered_l1_estimate(cfg, exact_cover({0, 0, 0, 0}), 1, 4), 0.0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const double e = layered_l1_estimate(cfg, exact_cover({0, 100, 0, 0}), seed, 4);
    EXPECT_GT(e, 100 / 1.1 - 1e-9);
    EXPECT_LE(e, 100 + 1e-9);
  }
}

TEST(Layered, UniformOnesAndPositiveLayerVariant) {
  const std::vector<double> ones(1024, 1.0);
  auto cfg = LayerConfig::from_paper(0.1, 1024, 1).set_chi_q(100, 16);
  int ok = 0;
  LayerTrace trace;
  for (std::uint64_t seed = 0; seed < 30; ++seed)
    ok += std::abs(layered_l1_estimate(cfg, exact_cover(ones), seed, 1024, &trace) - 1024) <= 0.3 * 1024;
  EXPECT_GE(ok, 20);
  EXPECT_FALSE(trace.counts.empty());
  // Unit entries sit in layer -1 or 0, which the positive-only summation drops.
  cfg.summation = LayerSummation::kPositiveLayersOnly;
  EXPECT_EQ(layered_l1_estimate(cfg, exact_cover(ones), 3, 1024), 0.0);
}

TEST(DimensionReduce, IndependenceTensorOfDiagonalPair) {
  const auto m = dense_independence_tensor(build_frequency_table(TupleStream(StreamShape{2, 2}, {{1, 1}, {2, 2}})));
  ASSERT_EQ(l1_norm(m), 4);
  const auto cfg = reduction_configs(PipelineConfig{}, 2, 2, 2, 1.0)[0];
  const auto subs = exact_sub_algorithms(m, 1.0);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) ok += std::abs(dimension_reduce(subs, cfg, seed, 2) - 4) <= 0.3 * 4;
  EXPECT_GE(ok, 18);
  EXPECT_EQ(dimension_reduce(exact_sub_algorithms(DenseTensor(2, 2), 1.0), cfg, 1, 2), 0.0);
}

TEST(DimensionReduce, DominantHyperplaneTracksNorm) {
  const auto m = dominant_tensor();
  const auto cfg = reduction_configs(PipelineConfig{}, 2, 8, 100, 1.0)[0];
  ReductionTrace trace;
  const double e = dimension_reduce(exact_sub_algorithms(m, 1.0), cfg, 5, 8, &trace);
  EXPECT_EQ(trace.run_estimates.size(), cfg.runs);
  EXPECT_NEAR(e, 10002, 0.3 * 10002);
}

}  // namespace
}  // namespace indep
