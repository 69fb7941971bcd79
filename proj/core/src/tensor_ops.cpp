#include "indep/tensor_ops.hpp"

#include <cstdlib>
#include <sstream>

#include "indep/errors.hpp"

namespace indep {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw DomainError("dense tensor entry overflow");
  return r;
}

std::int64_t checked_abs(std::int64_t a) {
  if (a == INT64_MIN) throw DomainError("dense tensor entry overflow");
  return a < 0 ? -a : a;
}

}  // namespace

std::uint64_t checked_volume(std::size_t n, std::size_t s, std::uint64_t budget) {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < s; ++i) {
    if (n != 0 && v > budget / n) {
      std::ostringstream os;
      os << "dense tensor of " << n << "^" << s << " entries exceeds the budget of " << budget;
      throw BudgetExceeded(os.str());
    }
    v *= n;
  }
  if (v > budget) throw BudgetExceeded("dense tensor exceeds the entry budget");
  return v;
}

DenseTensor::DenseTensor(std::size_t s, std::size_t n, std::uint64_t budget)
    : s_(s), n_(n), data_(checked_volume(n, s, budget), 0) {
  if (n == 0) throw DomainError("tensor extent must be positive");
}

DenseTensor::DenseTensor(std::size_t s, std::size_t n, std::vector<std::int64_t> entries)
    : s_(s), n_(n), data_(std::move(entries)) {
  if (n == 0) throw DomainError("tensor extent must be positive");
  if (data_.size() != checked_volume(n, s)) throw DomainError("entry count must equal n^s");
}

DenseTensor DenseTensor::vector(std::vector<std::int64_t> v) {
  const std::size_t n = v.size();
  return DenseTensor(1, n, std::move(v));
}

DenseTensor DenseTensor::matrix(const std::vector<std::vector<std::int64_t>>& rows) {
  const std::size_t n = rows.size();
  std::vector<std::int64_t> flat;
  flat.reserve(n * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw DomainError("matrix must be square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return DenseTensor(2, n, std::move(flat));
}

std::size_t DenseTensor::offset(std::span<const std::uint32_t> index) const {
  if (index.size() != s_) throw DomainError("index arity does not match tensor dimensionality");
  std::size_t off = 0;
  for (auto v : index) {
    if (v < 1 || v > n_) throw DomainError("tensor index out of range");
    off = off * n_ + (v - 1);
  }
  return off;
}

void DenseTensor::decode(std::size_t off, std::span<std::uint32_t> index) const {
  for (std::size_t l = s_; l-- > 0;) {
    index[l] = static_cast<std::uint32_t>(off % n_) + 1;
    off /= n_;
  }
}

BigInt l1_norm(const DenseTensor& m) {
  BigInt total = 0;
  for (auto v : m.entries()) total += v < 0 ? BigInt(-BigInt(v)) : BigInt(v);
  return total;
}

double l1_norm_double(const DenseTensor& m) {
  std::int64_t total = 0;
  for (auto v : m.entries()) total = checked_add(total, checked_abs(v));
  return static_cast<double>(total);
}

DenseTensor hyperplane(const DenseTensor& m, std::size_t l) {
  if (m.dims() < 1) throw DomainError("hyperplane of a scalar");
  if (l < 1 || l > m.extent()) throw DomainError("hyperplane index out of range");
  const std::size_t stride = m.size() / m.extent();
  auto first = m.entries().begin() + static_cast<std::ptrdiff_t>((l - 1) * stride);
  return DenseTensor(m.dims() - 1, m.extent(), std::vector<std::int64_t>(first, first + static_cast<std::ptrdiff_t>(stride)));
}

DenseTensor absolute_vector(const DenseTensor& m) {
  if (m.dims() < 1) throw DomainError("absolute vector of a scalar");
  const std::size_t stride = m.size() / m.extent();
  std::vector<std::int64_t> out(m.extent(), 0);
  for (std::size_t off = 0; off < m.size(); ++off)
    out[off / stride] = checked_add(out[off / stride], checked_abs(m.entries()[off]));
  return DenseTensor(1, m.extent(), std::move(out));
}

DenseTensor suffix_sum(const DenseTensor& m, std::size_t t) {
  if (t > m.dims()) throw DomainError("suffix-sum depth exceeds dimensionality");
  if (t == 0) return m;
  DenseTensor out(m.dims() - t, m.extent());
  const std::size_t stride = out.size();
  for (std::size_t off = 0; off < m.size(); ++off) {
    auto& cell = out.entries()[off % stride];
    cell = checked_add(cell, m.entries()[off]);
  }
  return out;
}

DenseTensor prefix_zero(const DenseTensor& m, std::span<const ZeroOneHash> hashes) {
  if (hashes.size() > m.dims()) throw DomainError("more prefix hashes than dimensions");
  DenseTensor out = m;
  std::vector<std::uint32_t> idx(m.dims());
  for (std::size_t off = 0; off < out.size(); ++off) {
    if (out.entries()[off] == 0) continue;
    m.decode(off, idx);
    for (std::size_t l = 0; l < hashes.size(); ++l) {
      if (!hashes[l](idx[l])) {
        out.entries()[off] = 0;
        break;
      }
    }
  }
  return out;
}

bool is_significant(const DenseTensor& m, std::size_t l, double alpha) {
  if (alpha < 0) throw DomainError("significance level must be non-negative");
  return l1_norm_double(hyperplane(m, l)) >= alpha * l1_norm_double(m);
}

DenseTensor dense_independence_tensor(const FrequencyTable& table, std::uint64_t budget) {
  if (table.m() == 0) throw EmptyStream("independence tensor of an empty stream");
  DenseTensor out(table.k(), table.n(), budget);
  std::vector<std::uint32_t> idx(table.k());
  for (std::size_t off = 0; off < out.size(); ++off) {
    out.decode(off, idx);
    const BigInt v = independence_tensor_entry(table, idx);
    if (v > INT64_MAX || v < -INT64_MAX) throw DomainError("independence tensor entry does not fit in 64 bits");
    out.entries()[off] = static_cast<std::int64_t>(v);
  }
  return out;
}

}  // namespace indep
