#pragma once

// Replayable randomness: pairwise-independent hash families over a prime
// field, zero-one masks built from them, and counter-based Cauchy sources.
// Everything here is a pure function of (seed, index).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace indep {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed roles. Each role gets a disjoint seed domain.
enum class SeedRole : std::uint64_t {
  kRun = 1,
  kLayerShift,
  kLayerLevel,
  kCover,
  kCoverBuckets,
  kTournament,
  kTournamentRound,
  kCauchyPolylog,
  kCauchyEpsilon,
  kDepth,
  kSynthetic,
  kSketchBank,
};

/// Deterministically derive a child seed from a parent seed, a role and an index.
constexpr std::uint64_t derive_seed(std::uint64_t parent, SeedRole role, std::uint64_t index = 0) noexcept {
  return mix64(mix64(parent ^ (static_cast<std::uint64_t>(role) * 0xd1b54a32d192ed03ULL)) + index);
}

/// h(x) = (a*x + b) mod p with p = 2^61 - 1 and (a, b) drawn from the seed.
///
/// For i != j and uniformly random (a, b) the pair (h(i), h(j)) is uniform on
/// [0, p)^2. The zero-one view thresholds h at round(q*p), so P(h(i) = 1) is q
/// up to a quantization error of 1/p. The bucket view reduces h modulo rho.
class PairwiseHashFamily {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  enum class Range { kZeroOne, kBuckets };

  /// Zero-one family on [1, n] with P(1) = q.
  static PairwiseHashFamily zero_one(std::uint64_t seed, std::size_t n, double q);
  /// Bucket family [1, n] -> [1, rho].
  static PairwiseHashFamily buckets(std::uint64_t seed, std::size_t n, std::uint64_t rho);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t domain() const noexcept { return n_; }
  Range range() const noexcept { return range_; }
  std::uint64_t threshold() const noexcept { return threshold_; }
  std::uint64_t bucket_count() const noexcept { return rho_; }
  /// Exact probability of a one: threshold / p.
  double probability() const noexcept;

  /// Raw field value in [0, p); no range check.
  std::uint64_t field_value(std::uint64_t x) const noexcept;

  /// Bit for index i in [1, n]. Throws DomainError when i is out of range.
  bool eval_zero_one(std::size_t i) const;
  /// Bucket for index i in [1, n], in [1, rho].
  std::uint64_t eval_bucket(std::size_t i) const;

  nlohmann::json describe() const;
  static PairwiseHashFamily from_description(const nlohmann::json& j);

  friend bool operator==(const PairwiseHashFamily&, const PairwiseHashFamily&) = default;

 private:
  PairwiseHashFamily(std::uint64_t seed, std::size_t n, Range range, std::uint64_t threshold, std::uint64_t rho);
  void check_index(std::size_t i) const;

  std::uint64_t seed_ = 0;
  std::size_t n_ = 0;
  Range range_ = Range::kZeroOne;
  std::uint64_t threshold_ = 0;
  std::uint64_t rho_ = 1;
  std::uint64_t a_ = 0;
  std::uint64_t b_ = 0;
};

/// A total function [1, n] -> {0, 1} with a stable 64-bit identity.
///
/// Built from constants, explicit tables, thresholded pairwise hashes, bucket
/// indicators, complements and pointwise products. Two masks with the same
/// construction have the same id; the id is what sketch engines key on.
class ZeroOneHash {
 public:
  /// The constant-one mask.
  ZeroOneHash();

  static ZeroOneHash ones();
  static ZeroOneHash zeros();
  /// bits[i - 1] is the value at index i.
  static ZeroOneHash from_bits(std::vector<bool> bits);
  static ZeroOneHash threshold(PairwiseHashFamily family);
  /// 1 iff family.eval_bucket(i) == bucket.
  static ZeroOneHash bucket_indicator(PairwiseHashFamily family, std::uint64_t bucket);

  ZeroOneHash complement() const;
  /// Pointwise product. Products of products are flattened.
  ZeroOneHash operator*(const ZeroOneHash& other) const;

  bool operator()(std::size_t i) const;
  std::uint64_t id() const noexcept;
  bool is_constant_one() const noexcept;

  nlohmann::json describe() const;
  static ZeroOneHash from_description(const nlohmann::json& j);

  friend bool operator==(const ZeroOneHash& a, const ZeroOneHash& b) noexcept { return a.id() == b.id(); }

 private:
  struct Node;
  explicit ZeroOneHash(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

/// Standard Cauchy (or omega-truncated Cauchy) value for a uniform u.
///
/// u is clamped into [2^-53, 1 - 2^-53]; the result is tan(pi (u - 1/2)),
/// clamped to [-omega, omega] when omega > 0.
double cauchy_from_uniform(double u, double omega = 0.0);

/// Indexed Cauchy variables C(1), ..., C(n) regenerated from a seed on demand.
class IndexedCauchySource {
 public:
  IndexedCauchySource() = default;
  /// omega <= 0 means untruncated.
  explicit IndexedCauchySource(std::uint64_t seed, double omega = 0.0) : seed_(seed), omega_(omega) {}

  std::uint64_t seed() const noexcept { return seed_; }
  double omega() const noexcept { return omega_; }
  bool truncated() const noexcept { return omega_ > 0.0; }

  /// Deterministic uniform in (0, 1) for index i.
  double uniform_at(std::uint64_t i) const noexcept;
  double at(std::uint64_t i) const noexcept { return cauchy_from_uniform(uniform_at(i), omega_); }

  nlohmann::json describe() const;
  static IndexedCauchySource from_description(const nlohmann::json& j);

  friend bool operator==(const IndexedCauchySource&, const IndexedCauchySource&) = default;

 private:
  std::uint64_t seed_ = 0;
  double omega_ = 0.0;
};

/// Default truncation threshold 100 * k * n.
inline double default_truncation(std::size_t k, std::size_t n) { return 100.0 * static_cast<double>(k * n); }

}  // namespace indep
