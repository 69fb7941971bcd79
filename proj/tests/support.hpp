#pragma once

// Shared helpers for unit and acceptance tests: seeded generators of streams,
// tensors and masks, plus exact reference computations written independently
// of the library's sparse formulas.

#include <cstdint>
#include <random>
#include <vector>

#include "indep/hashing.hpp"
#include "indep/stream_core.hpp"
#include "indep/tensor_ops.hpp"

namespace indep::test {

using Rng = std::mt19937_64;

inline TupleStream random_stream(Rng& rng, std::size_t k, std::size_t n, std::size_t m) {
  TupleStream s(StreamShape{k, n});
  std::uniform_int_distribution<std::uint32_t> coord(1, static_cast<std::uint32_t>(n));
  std::vector<std::uint32_t> t(k);
  for (std::size_t i = 0; i < m; ++i) {
    for (auto& v : t) v = coord(rng);
    s.push_back(t);
  }
  return s;
}

/// Tuples concentrated on a few random support points, so joint and product differ.
inline TupleStream clustered_stream(Rng& rng, std::size_t k, std::size_t n, std::size_t m, std::size_t support) {
  const TupleStream points = random_stream(rng, k, n, support);
  TupleStream s(StreamShape{k, n});
  std::uniform_int_distribution<std::size_t> pick(0, support - 1);
  for (std::size_t i = 0; i < m; ++i) s.push_back(points[pick(rng)]);
  return s;
}

inline DenseTensor random_tensor(Rng& rng, std::size_t s, std::size_t n, std::int64_t lo, std::int64_t hi) {
  DenseTensor t(s, n);
  std::uniform_int_distribution<std::int64_t> d(lo, hi);
  for (auto& e : t.entries()) e = d(rng);
  return t;
}

inline ZeroOneHash random_mask(Rng& rng, std::size_t n) {
  std::vector<bool> bits(n);
  std::bernoulli_distribution b(0.5);
  for (std::size_t i = 0; i < n; ++i) bits[i] = b(rng);
  return ZeroOneHash::from_bits(bits);
}

inline ZeroOneHash mask_of(std::initializer_list<int> bits) {
  std::vector<bool> v;
  for (int b : bits) v.push_back(b != 0);
  return ZeroOneHash::from_bits(v);
}

/// Calls f(index) for every index of [1, n]^s in row-major order.
template <class F>
void for_each_index(std::size_t s, std::size_t n, F&& f) {
  std::vector<std::uint32_t> idx(s, 1);
  while (true) {
    f(std::span<const std::uint32_t>(idx));
    std::size_t d = s;
    while (d > 0 && idx[d - 1] == n) idx[--d] = 1;
    if (d == 0) return;
    ++idx[d - 1];
  }
}

/// Half the L1 distance between joint and product by full enumeration of [n]^k.
inline Rational brute_force_distance(const FrequencyTable& t) {
  const std::size_t k = t.k();
  const Rational m(static_cast<long long>(t.m()));
  Rational mk(1);
  for (std::size_t l = 0; l < k; ++l) mk *= m;
  Rational sum(0);
  for_each_index(k, t.n(), [&](std::span<const std::uint32_t> i) {
    Rational prod(1);
    for (std::size_t l = 0; l < k; ++l) prod *= Rational(static_cast<long long>(t.margin(l + 1, i[l])));
    const Rational diff = Rational(static_cast<long long>(t.joint(i))) / m - prod / mk;
    sum += diff < 0 ? Rational(-diff) : diff;
  });
  return sum / 2;
}

/// Sum of |entry| of M_Ind by full enumeration.
inline BigInt brute_force_l1(const FrequencyTable& t) {
  BigInt sum = 0;
  for_each_index(t.k(), t.n(), [&](std::span<const std::uint32_t> i) {
    const BigInt e = independence_tensor_entry(t, i);
    sum += e < 0 ? BigInt(-e) : e;
  });
  return sum;
}

/// sum_i C(i) x_i over the entries x_i of T_{s'}(W(M_Ind, hashes)), C(i) = prod_j coefficient(j, i_j).
template <class Scalar, class Coefficient>
Scalar coefficient_expansion(const FrequencyTable& table, std::size_t s_prime, std::span<const ZeroOneHash> hashes,
                             Coefficient&& coefficient) {
  const DenseTensor t = suffix_sum(prefix_zero(dense_independence_tensor(table), hashes), s_prime);
  Scalar sum(0);
  for_each_index(t.dims(), t.extent(), [&](std::span<const std::uint32_t> i) {
    Scalar c(1);
    for (std::size_t j = 0; j < i.size(); ++j) c *= coefficient(j + 1, i[j]);
    sum += c * Scalar(static_cast<long long>(t.at(i)));
  });
  return sum;
}

}  // namespace indep::test
