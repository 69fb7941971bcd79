#pragma once

// Product sketches of the implicit tensor T_{s'}(W(M_Ind, H_1..H_s)).
//
// A product sketch keeps Joint and Margin_1..Margin_k; its value
// m^(k-1) Joint - prod_j Margin_j equals sum_i C(i) x_i over the entries x_i of
// the suffix-summed, prefix-masked tensor, where C(i) is a product of
// per-dimension (truncated) Cauchy variables.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "indep/errors.hpp"
#include "indep/hashing.hpp"
#include "indep/stream_core.hpp"

namespace indep {

/// The (s, s') pair of a sketch: s prefix hashes, suffix-sum depth s'.
struct SketchShape {
  std::size_t k = 2;
  std::size_t n = 1;
  std::size_t s = 0;
  std::size_t s_prime = 0;

  void validate() const;
  /// Number of Cauchy families, k - s'.
  std::size_t families() const noexcept { return k - s_prime; }
  friend bool operator==(const SketchShape&, const SketchShape&) = default;
};

/// lead - product, with differences inside the rounding noise of the operands mapped to exactly 0.
inline double guarded_difference(double lead, double product) noexcept {
  const double v = lead - product;
  const double noise = 64 * std::numeric_limits<double>::epsilon() * (std::abs(lead) + std::abs(product));
  return std::abs(v) <= noise ? 0.0 : v;
}

/// Accumulators of one product sketch over an arbitrary coefficient ring.
///
/// coefficient(j, v) supplies C_{j, v} for family j in [1, k - s'] and value v in [1, n].
/// Scalar = double is the streaming case; exact rationals are used to test the
/// algebraic identity behind the sketch.
template <class Scalar>
class BasicProductSketch {
 public:
  using Coefficient = std::function<Scalar(std::size_t family, std::uint32_t value)>;

  BasicProductSketch(SketchShape shape, std::vector<ZeroOneHash> hashes, Coefficient coefficient)
      : shape_(shape), hashes_(std::move(hashes)), coefficient_(std::move(coefficient)), margins_(shape.k, Scalar(0)) {
    shape_.validate();
    if (hashes_.size() != shape_.s) throw ConfigError("product sketch needs exactly s prefix hashes");
  }

  const SketchShape& shape() const noexcept { return shape_; }
  const std::vector<ZeroOneHash>& hashes() const noexcept { return hashes_; }
  const Scalar& joint() const noexcept { return joint_; }
  const std::vector<Scalar>& margins() const noexcept { return margins_; }
  std::uint64_t m_seen() const noexcept { return m_seen_; }

  void update(std::span<const std::uint32_t> tuple) {
    validate_tuple(StreamShape{shape_.k, shape_.n}, tuple, m_seen_);
    const std::size_t s = shape_.s;
    const std::size_t sp = shape_.s_prime;
    bool mask = true;
    for (std::size_t j = 0; j < s && mask; ++j) mask = hashes_[j](tuple[j]);
    Scalar product(1);
    for (std::size_t j = 1; j <= shape_.k - sp; ++j) product *= coefficient_(j, tuple[sp + j - 1]);
    if (mask) joint_ += product;
    for (std::size_t j = 1; j <= shape_.k; ++j) {
      const std::uint32_t v = tuple[j - 1];
      if (j <= sp) {
        if (hashes_[j - 1](v)) margins_[j - 1] += Scalar(1);
      } else if (j <= s) {
        if (hashes_[j - 1](v)) margins_[j - 1] += coefficient_(j - sp, v);
      } else {
        margins_[j - 1] += coefficient_(j - sp, v);
      }
    }
    ++m_seen_;
  }

  /// m^(k-1) Joint - prod Margin_j. Throws EmptyStream before the first update.
  Scalar value() const {
    if (m_seen_ == 0) throw EmptyStream("sketch value needs at least one tuple");
    Scalar scale(1);
    for (std::size_t j = 1; j < shape_.k; ++j) scale *= Scalar(m_seen_);
    Scalar product(1);
    for (const auto& mj : margins_) product *= mj;
    if constexpr (std::is_same_v<Scalar, double>) {
      return guarded_difference(scale * joint_, product);
    } else {
      return scale * joint_ - product;
    }
  }

  /// Componentwise sum; the caller checks randomness compatibility.
  void absorb(const BasicProductSketch& other) {
    joint_ += other.joint_;
    for (std::size_t j = 0; j < margins_.size(); ++j) margins_[j] += other.margins_[j];
    m_seen_ += other.m_seen_;
  }

  void set_accumulators(Scalar joint, std::vector<Scalar> margins, std::uint64_t m_seen) {
    if (margins.size() != shape_.k) throw MalformedInput("margin count must equal k");
    joint_ = std::move(joint);
    margins_ = std::move(margins);
    m_seen_ = m_seen;
  }

 private:
  SketchShape shape_;
  std::vector<ZeroOneHash> hashes_;
  Coefficient coefficient_;
  Scalar joint_{0};
  std::vector<Scalar> margins_;
  std::uint64_t m_seen_ = 0;
};

/// Cauchy families C_1..C_{k-s'} for one repetition: C_1 untruncated, the rest omega-truncated.
std::vector<IndexedCauchySource> product_cauchy_families(std::uint64_t bank_seed, std::size_t repetition,
                                                         std::size_t families, double omega);

/// A floating-point product sketch with replayable Cauchy randomness.
class ProductSketchState {
 public:
  static constexpr int kSnapshotVersion = 1;

  ProductSketchState(SketchShape shape, std::vector<ZeroOneHash> hashes, std::vector<IndexedCauchySource> cauchy);

  const SketchShape& shape() const noexcept { return sketch_.shape(); }
  const std::vector<IndexedCauchySource>& cauchy() const noexcept { return cauchy_; }
  double joint() const noexcept { return sketch_.joint(); }
  const std::vector<double>& margins() const noexcept { return sketch_.margins(); }
  std::uint64_t m_seen() const noexcept { return sketch_.m_seen(); }

  void update(std::span<const std::uint32_t> tuple) { sketch_.update(tuple); }
  void consume(TupleSource& source);
  double value() const { return sketch_.value(); }

  /// True when shapes, hashes and Cauchy descriptions agree.
  bool compatible(const ProductSketchState& other) const;
  /// Componentwise sum; throws MergeIncompatible on randomness mismatch.
  friend ProductSketchState merge(const ProductSketchState& a, const ProductSketchState& b);

  /// Versioned JSON snapshot: config, seeds, accumulators, m_seen.
  nlohmann::json snapshot() const;
  static ProductSketchState restore(const nlohmann::json& j);

 private:
  std::vector<IndexedCauchySource> cauchy_;
  BasicProductSketch<double> sketch_;
};

enum class SketchPurpose { kEpsilon, kPolylog };

/// r product sketches sharing prefix hashes, with independent Cauchy families per repetition.
class SketchBank {
 public:
  SketchBank(SketchShape shape, std::vector<ZeroOneHash> hashes, std::size_t repetitions, std::uint64_t seed,
             SketchPurpose purpose, double omega);

  const SketchShape& shape() const noexcept { return shape_; }
  SketchPurpose purpose() const noexcept { return purpose_; }
  std::size_t repetitions() const noexcept { return states_.size(); }
  const std::vector<ProductSketchState>& states() const noexcept { return states_; }
  std::uint64_t m_seen() const noexcept { return states_.empty() ? 0 : states_.front().m_seen(); }

  void update(std::span<const std::uint32_t> tuple);
  void consume(TupleSource& source);
  /// |value| of every repetition.
  std::vector<double> absolute_values() const;

 private:
  SketchShape shape_;
  SketchPurpose purpose_;
  std::vector<ProductSketchState> states_;
};

/// Repetitions required by the estimators below.
std::size_t epsilon_repetitions(double epsilon, double delta, double c = 8.0);
std::size_t polylog_repetitions(double delta, double c = 64.0);

/// Median of |value| for a bank with s = s' = k - 1; an epsilon-approximation of
/// |T_{k-1}(W(M_Ind, H_1..H_{k-1}))|.
double epsilon_l1_estimate(const SketchBank& bank, double epsilon, double delta, double c = 8.0);

/// Median of |value|; within a log^k n factor of |T_{s'}(W(M_Ind, H_1..H_s))|.
double polylog_l1_estimate(const SketchBank& bank, double delta, double c = 64.0);

/// The approximation factor of polylog_l1_estimate: max(2, log2 n)^k.
double polylog_beta(std::size_t n, std::size_t k);

/// Median of values (average of the two middle elements for even counts). Empty input gives 0.
double median(std::vector<double> values);

}  // namespace indep
