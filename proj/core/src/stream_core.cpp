#include "indep/stream_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "indep/errors.hpp"

namespace indep {

void StreamShape::validate() const {
  if (k < 1) throw ConfigError("arity k must be at least 1");
  if (n < 1) throw ConfigError("domain size n must be at least 1");
  if (n > 0xffffffffULL) throw ConfigError("domain size n must fit in 32 bits");
}

void validate_tuple(const StreamShape& shape, std::span<const std::uint32_t> tuple, std::size_t record_index) {
  if (tuple.size() != shape.k) {
    std::ostringstream os;
    os << "record " << record_index << ": expected " << shape.k << " coordinates, got " << tuple.size();
    throw MalformedInput(os.str());
  }
  for (std::size_t l = 0; l < tuple.size(); ++l) {
    if (tuple[l] < 1 || tuple[l] > shape.n) {
      std::ostringstream os;
      os << "record " << record_index << ": coordinate " << (l + 1) << " = " << tuple[l] << " outside [1, " << shape.n
         << "]";
      throw MalformedInput(os.str());
    }
  }
}

TupleStream::TupleStream(StreamShape shape) : shape_(shape) { shape_.validate(); }

TupleStream::TupleStream(StreamShape shape, std::initializer_list<std::initializer_list<std::uint32_t>> tuples)
    : TupleStream(shape) {
  for (const auto& t : tuples) push_back(std::vector<std::uint32_t>(t));
}

void TupleStream::push_back(std::span<const std::uint32_t> tuple) {
  validate_tuple(shape_, tuple, size());
  data_.insert(data_.end(), tuple.begin(), tuple.end());
}

TupleStream& TupleStream::append(const TupleStream& other) {
  if (!(other.shape_ == shape_)) throw ConfigError("cannot concatenate streams of different shape");
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  return *this;
}

bool TupleStream::Source::next(std::span<std::uint32_t> out) {
  if (pos_ >= stream_->size()) return false;
  auto t = (*stream_)[pos_++];
  std::copy(t.begin(), t.end(), out.begin());
  return true;
}

std::size_t TupleHash::operator()(const std::vector<std::uint32_t>& t) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto v : t) {
    h ^= v;
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

FrequencyTable::FrequencyTable(StreamShape shape)
    : shape_(shape), margins_(shape.k, std::vector<std::uint64_t>(shape.n, 0)) {
  shape_.validate();
}

std::uint64_t FrequencyTable::joint(std::span<const std::uint32_t> tuple) const {
  auto it = joint_.find(std::vector<std::uint32_t>(tuple.begin(), tuple.end()));
  return it == joint_.end() ? 0 : it->second;
}

std::uint64_t FrequencyTable::margin(std::size_t l, std::uint32_t t) const {
  if (l < 1 || l > shape_.k || t < 1 || t > shape_.n) throw DomainError("margin index out of range");
  return margins_[l - 1][t - 1];
}

void FrequencyTable::add(std::span<const std::uint32_t> tuple) {
  validate_tuple(shape_, tuple, m_);
  ++joint_[std::vector<std::uint32_t>(tuple.begin(), tuple.end())];
  for (std::size_t l = 0; l < shape_.k; ++l) ++margins_[l][tuple[l] - 1];
  ++m_;
}

FrequencyTable build_frequency_table(TupleSource& source) {
  FrequencyTable table(source.shape());
  std::vector<std::uint32_t> buf(source.shape().k);
  while (source.next(buf)) table.add(buf);
  return table;
}

FrequencyTable build_frequency_table(const TupleStream& stream) {
  auto src = stream.source();
  return build_frequency_table(src);
}

namespace {

BigInt pow_big(std::uint64_t base, std::size_t e) {
  BigInt r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

BigInt margin_product(const FrequencyTable& table, std::span<const std::uint32_t> i) {
  BigInt p = 1;
  for (std::size_t l = 0; l < table.k(); ++l) p *= table.margin(l + 1, i[l]);
  return p;
}

}  // namespace

BigInt independence_tensor_entry(const FrequencyTable& table, std::span<const std::uint32_t> i) {
  if (table.m() == 0) throw EmptyStream("independence tensor of an empty stream");
  validate_tuple(table.shape(), i, 0);
  return pow_big(table.m(), table.k() - 1) * table.joint(i) - margin_product(table, i);
}

BigInt independence_tensor_l1(const FrequencyTable& table) {
  if (table.m() == 0) throw EmptyStream("independence tensor of an empty stream");
  // Off the joint support every entry is -prod f_l, and the product mass over
  // all of [n]^k is prod_l (sum_t f_l(t)) = m^k.
  const BigInt scale = pow_big(table.m(), table.k() - 1);
  BigInt support_abs = 0;
  BigInt support_product = 0;
  for (const auto& [tuple, count] : table.joint_counts()) {
    BigInt prod = margin_product(table, tuple);
    BigInt entry = scale * count - prod;
    support_abs += entry < 0 ? BigInt(-entry) : entry;
    support_product += prod;
  }
  return support_abs + pow_big(table.m(), table.k()) - support_product;
}

Rational exact_statistical_distance(const FrequencyTable& table) {
  if (table.m() == 0) throw EmptyStream("statistical distance of an empty stream");
  return distance_from_tensor_norm(independence_tensor_l1(table), table.m(), table.k());
}

double distance_from_tensor_norm(double l1_of_m_ind, std::uint64_t m, std::size_t k) {
  if (m == 0) throw EmptyStream("normalization needs m >= 1");
  if (l1_of_m_ind < 0) throw DomainError("tensor norm must be non-negative");
  return l1_of_m_ind / (2.0 * std::pow(static_cast<double>(m), static_cast<double>(k)));
}

Rational distance_from_tensor_norm(const BigInt& l1_of_m_ind, std::uint64_t m, std::size_t k) {
  if (m == 0) throw EmptyStream("normalization needs m >= 1");
  if (l1_of_m_ind < 0) throw DomainError("tensor norm must be non-negative");
  return Rational(l1_of_m_ind, 2 * pow_big(m, k));
}

}  // namespace indep
