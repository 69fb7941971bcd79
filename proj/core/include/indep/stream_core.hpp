#pragma once

// Streams of k-tuples, exact frequency statistics, the independence tensor
// M_Ind and the exact statistical-distance oracle.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace indep {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Arity k >= 2 (>= 1 is accepted for sub-streams) and per-coordinate domain [1, n].
struct StreamShape {
  std::size_t k = 2;
  std::size_t n = 1;

  void validate() const;
  friend bool operator==(const StreamShape&, const StreamShape&) = default;
};

/// One-pass producer of k-tuples. Coordinates are 1-based.
class TupleSource {
 public:
  virtual ~TupleSource() = default;
  virtual StreamShape shape() const = 0;
  /// Writes the next tuple into out (size k) and returns true, or returns false at end of stream.
  virtual bool next(std::span<std::uint32_t> out) = 0;
};

/// A materialized stream stored as a flat m*k array.
class TupleStream {
 public:
  TupleStream() = default;
  explicit TupleStream(StreamShape shape);
  TupleStream(StreamShape shape, std::initializer_list<std::initializer_list<std::uint32_t>> tuples);

  const StreamShape& shape() const noexcept { return shape_; }
  std::size_t k() const noexcept { return shape_.k; }
  std::size_t n() const noexcept { return shape_.n; }
  std::size_t size() const noexcept { return shape_.k == 0 ? 0 : data_.size() / shape_.k; }
  bool empty() const noexcept { return data_.empty(); }

  /// Appends a tuple; throws MalformedInput on arity or range violations.
  void push_back(std::span<const std::uint32_t> tuple);
  std::span<const std::uint32_t> operator[](std::size_t idx) const noexcept {
    return {data_.data() + idx * shape_.k, shape_.k};
  }

  /// Concatenation; shapes must match.
  TupleStream& append(const TupleStream& other);

  /// A single-pass source over this stream. The stream must outlive the source.
  class Source : public TupleSource {
   public:
    explicit Source(const TupleStream& stream) : stream_(&stream) {}
    StreamShape shape() const override { return stream_->shape(); }
    bool next(std::span<std::uint32_t> out) override;

   private:
    const TupleStream* stream_;
    std::size_t pos_ = 0;
  };
  Source source() const { return Source(*this); }

 private:
  StreamShape shape_{};
  std::vector<std::uint32_t> data_;
};

/// Checks arity and range of one tuple. record_index is reported in the error.
void validate_tuple(const StreamShape& shape, std::span<const std::uint32_t> tuple, std::size_t record_index);

/// Hash for tuple keys.
struct TupleHash {
  std::size_t operator()(const std::vector<std::uint32_t>& t) const noexcept;
};

/// Exact joint and margin counts of a stream. Immutable once built.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(StreamShape shape);

  const StreamShape& shape() const noexcept { return shape_; }
  std::size_t k() const noexcept { return shape_.k; }
  std::size_t n() const noexcept { return shape_.n; }
  std::uint64_t m() const noexcept { return m_; }

  /// f_i; zero for tuples never seen.
  std::uint64_t joint(std::span<const std::uint32_t> tuple) const;
  /// f_l(t) for dimension l in [1, k] and value t in [1, n].
  std::uint64_t margin(std::size_t l, std::uint32_t t) const;

  const std::unordered_map<std::vector<std::uint32_t>, std::uint64_t, TupleHash>& joint_counts() const noexcept {
    return joint_;
  }

  /// Adds one tuple; used by build_frequency_table.
  void add(std::span<const std::uint32_t> tuple);

 private:
  StreamShape shape_{};
  std::uint64_t m_ = 0;
  std::unordered_map<std::vector<std::uint32_t>, std::uint64_t, TupleHash> joint_;
  std::vector<std::vector<std::uint64_t>> margins_;  // [l-1][t-1]
};

/// One traversal of the source. Out-of-range coordinates raise MalformedInput naming the record index.
FrequencyTable build_frequency_table(TupleSource& source);
FrequencyTable build_frequency_table(const TupleStream& stream);

/// Entry of M_Ind at i: m^(k-1) f_i - prod_l f_l(i_l), exact.
BigInt independence_tensor_entry(const FrequencyTable& table, std::span<const std::uint32_t> i);

/// Sum over all of [n]^k of |independence_tensor_entry|, computed from the joint support only.
BigInt independence_tensor_l1(const FrequencyTable& table);

/// Delta(P_joint, P_product) as an exact rational in [0, 1].
Rational exact_statistical_distance(const FrequencyTable& table);

/// |M_Ind| / (2 m^k).
double distance_from_tensor_norm(double l1_of_m_ind, std::uint64_t m, std::size_t k);
Rational distance_from_tensor_norm(const BigInt& l1_of_m_ind, std::uint64_t m, std::size_t k);

inline double to_double(const Rational& r) { return static_cast<double>(r); }

}  // namespace indep
