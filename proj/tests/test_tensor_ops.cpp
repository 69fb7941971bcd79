#include <gtest/gtest.h>

#include "indep/errors.hpp"
#include "indep/tensor_ops.hpp"
#include "support.hpp"

namespace indep {
namespace {

using test::mask_of;
using test::Rng;

const DenseTensor m1234 = DenseTensor::matrix({{1, 2}, {3, 4}});

TEST(DenseTensor, OffsetDecodeBijection) {
  const DenseTensor t(3, 4);
  std::vector<std::uint32_t> idx(3);
  for (std::size_t o = 0; o < t.size(); ++o) {
    t.decode(o, idx);
    EXPECT_EQ(t.offset(idx), o);
  }
  EXPECT_EQ(t.size(), 64u);
  const std::uint32_t first_outer[] = {2, 1, 1};
  EXPECT_EQ(t.offset(first_outer), 16u);
}

TEST(DenseTensor, BudgetIsEnforced) {
  EXPECT_THROW(checked_volume(1000, 3), BudgetExceeded);
  EXPECT_EQ(checked_volume(4, 3), 64u);
  EXPECT_THROW(DenseTensor(2, 100, 1000), BudgetExceeded);
}

TEST(L1Norm, Examples) {
  EXPECT_EQ(l1_norm(m1234), 10);
  EXPECT_EQ(l1_norm(DenseTensor(3, 3)), 0);
  EXPECT_EQ(l1_norm(DenseTensor::vector({-3, 3})), 6);
  EXPECT_DOUBLE_EQ(l1_norm_double(DenseTensor::vector({-3, 3})), 6.0);
}

TEST(Hyperplane, Examples) {
  EXPECT_EQ(hyperplane(m1234, 1), DenseTensor::vector({1, 2}));
  EXPECT_EQ(hyperplane(m1234, 2), DenseTensor::vector({3, 4}));
  EXPECT_EQ(hyperplane(DenseTensor::vector({7, 9}), 2), DenseTensor::scalar(9));
  EXPECT_THROW(hyperplane(m1234, 3), DomainError);
  EXPECT_THROW(hyperplane(m1234, 0), DomainError);
}

TEST(AbsoluteVector, Examples) {
  EXPECT_EQ(absolute_vector(m1234), DenseTensor::vector({3, 7}));
  EXPECT_EQ(absolute_vector(DenseTensor::matrix({{1, -2}, {-3, 4}})), DenseTensor::vector({3, 7}));
  EXPECT_EQ(absolute_vector(DenseTensor(2, 2)), DenseTensor::vector({0, 0}));
}

TEST(SuffixSum, Examples) {
  EXPECT_EQ(suffix_sum(m1234, 1), DenseTensor::vector({4, 6}));
  EXPECT_EQ(suffix_sum(m1234, 0), m1234);
  EXPECT_EQ(suffix_sum(m1234, 2), DenseTensor::scalar(10));
  EXPECT_THROW(suffix_sum(m1234, 3), DomainError);
}

TEST(PrefixZero, Examples) {
  const ZeroOneHash h[] = {mask_of({0, 1})};
  EXPECT_EQ(prefix_zero(m1234, h), DenseTensor::matrix({{0, 0}, {3, 4}}));
  const ZeroOneHash ones[] = {ZeroOneHash::ones(), ZeroOneHash::ones()};
  EXPECT_EQ(prefix_zero(m1234, ones), m1234);
  const ZeroOneHash zero[] = {ZeroOneHash::zeros()};
  EXPECT_EQ(prefix_zero(m1234, zero), DenseTensor(2, 2));
  const ZeroOneHash three[] = {ZeroOneHash::ones(), ZeroOneHash::ones(), ZeroOneHash::ones()};
  EXPECT_THROW(prefix_zero(m1234, three), DomainError);
}

TEST(IsSignificant, Examples) {
  EXPECT_TRUE(is_significant(DenseTensor::matrix({{10, 0}, {0, 1}}), 1, 0.9));
  EXPECT_FALSE(is_significant(DenseTensor::matrix({{1, 0}, {0, 1}}), 1, 0.6));
  EXPECT_TRUE(is_significant(DenseTensor(2, 2), 2, 0.0));
}

TEST(DenseIndependenceTensor, Examples) {
  const StreamShape sh{2, 2};
  const auto d = dense_independence_tensor(build_frequency_table(TupleStream(sh, {{1, 1}, {2, 2}})));
  EXPECT_EQ(d, DenseTensor::matrix({{1, -1}, {-1, 1}}));
  EXPECT_EQ(l1_norm(d), 4);
  EXPECT_EQ(dense_independence_tensor(build_frequency_table(TupleStream(sh, {{2, 1}}))), DenseTensor(2, 2));
  const auto table = build_frequency_table(TupleStream(sh, {{1, 2}, {1, 2}, {2, 1}, {2, 1}}));
  const auto e = dense_independence_tensor(table);
  EXPECT_EQ(e, DenseTensor::matrix({{-4, 4}, {4, -4}}));
  EXPECT_EQ(Rational(l1_norm(e)), 2 * 16 * exact_statistical_distance(table));
}

TEST(DenseIndependenceTensor, MatchesEntryFunction) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto table = build_frequency_table(test::random_stream(rng, 3, 3, 1 + trial));
    const auto d = dense_independence_tensor(table);
    test::for_each_index(3, 3, [&](std::span<const std::uint32_t> i) {
      EXPECT_EQ(BigInt(d.at(i)), independence_tensor_entry(table, i));
    });
  }
  EXPECT_THROW(dense_independence_tensor(build_frequency_table(TupleStream(StreamShape{3, 300}, {{1, 1, 1}}))),
               BudgetExceeded);
}

TEST(TensorIdentities, AbsoluteVectorPreservesNormAndSuffixSumContracts) {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t s = 1 + trial % 4, n = 1 + trial % 5;
    const auto m = test::random_tensor(rng, s, n, -9, 9);
    EXPECT_EQ(l1_norm(absolute_vector(m)), l1_norm(m));
    EXPECT_LE(l1_norm(suffix_sum(m, 1)), l1_norm(m));
    // Entries of any operator composition stay within n^s times the entry bound.
    std::int64_t bound = 9;
    for (std::size_t d = 0; d < s; ++d) bound *= static_cast<std::int64_t>(n);
    const auto total = suffix_sum(m, s);
    for (auto e : total.entries()) EXPECT_LE(std::abs(e), bound);
  }
}

}  // namespace
}  // namespace indep
