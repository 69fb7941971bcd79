#pragma once

// Small dense tensors with exact integer entries and the operators
// Hyperplane, AbsoluteVector, Suffix-Sum and Prefix-Zero.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "indep/hashing.hpp"
#include "indep/stream_core.hpp"

namespace indep {

/// Default dense budget: at most 2^24 entries.
inline constexpr std::uint64_t kDefaultDenseBudget = std::uint64_t{1} << 24;

/// n^s checked against a budget; throws BudgetExceeded.
std::uint64_t checked_volume(std::size_t n, std::size_t s, std::uint64_t budget = kDefaultDenseBudget);

/// An s-dimensional array over [1, n]^s, row-major with the first coordinate outermost.
/// s = 0 is a scalar.
class DenseTensor {
 public:
  DenseTensor() : DenseTensor(0, 1) {}
  DenseTensor(std::size_t s, std::size_t n, std::uint64_t budget = kDefaultDenseBudget);
  DenseTensor(std::size_t s, std::size_t n, std::vector<std::int64_t> entries);

  static DenseTensor scalar(std::int64_t v) { return DenseTensor(0, 1, std::vector<std::int64_t>{v}); }
  static DenseTensor vector(std::vector<std::int64_t> v);
  /// rows[i - 1][j - 1] is entry (i, j).
  static DenseTensor matrix(const std::vector<std::vector<std::int64_t>>& rows);

  std::size_t dims() const noexcept { return s_; }
  std::size_t extent() const noexcept { return n_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const std::int64_t> entries() const& noexcept { return data_; }
  std::span<std::int64_t> entries() & noexcept { return data_; }
  /// A span into a temporary would dangle.
  std::span<const std::int64_t> entries() && = delete;

  /// 1-based multi-index access.
  std::int64_t at(std::span<const std::uint32_t> index) const { return data_[offset(index)]; }
  std::int64_t& at(std::span<const std::uint32_t> index) { return data_[offset(index)]; }

  std::size_t offset(std::span<const std::uint32_t> index) const;
  /// Inverse of offset; writes s coordinates.
  void decode(std::size_t offset, std::span<std::uint32_t> index) const;

  /// Scalars compare by value alone; their extent carries no information.
  friend bool operator==(const DenseTensor& a, const DenseTensor& b) noexcept {
    return a.s_ == b.s_ && (a.s_ == 0 || a.n_ == b.n_) && a.data_ == b.data_;
  }

 private:
  std::size_t s_;
  std::size_t n_;
  std::vector<std::int64_t> data_;
};

/// |M|, exact.
BigInt l1_norm(const DenseTensor& m);
/// Same value as a double, for estimators and oracles.
double l1_norm_double(const DenseTensor& m);

/// The (s-1)-dimensional slice with first coordinate fixed to l.
DenseTensor hyperplane(const DenseTensor& m, std::size_t l);

/// Entry l is |hyperplane(m, l)|.
DenseTensor absolute_vector(const DenseTensor& m);

/// Sums out the first t coordinates.
DenseTensor suffix_sum(const DenseTensor& m, std::size_t t);

/// Masks entry i by prod_{l <= t} H_l(i_l), t = hashes.size().
DenseTensor prefix_zero(const DenseTensor& m, std::span<const ZeroOneHash> hashes);

/// |hyperplane(m, l)| >= alpha |m|.
bool is_significant(const DenseTensor& m, std::size_t l, double alpha);

/// M_Ind as a dense k-dimensional tensor.
DenseTensor dense_independence_tensor(const FrequencyTable& table, std::uint64_t budget = kDefaultDenseBudget);

}  // namespace indep
