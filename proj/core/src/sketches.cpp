#include "indep/sketches.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

namespace indep {

namespace {

constexpr std::size_t kTabulateLimit = std::size_t{1} << 16;

BasicProductSketch<double>::Coefficient cauchy_coefficient(const std::vector<IndexedCauchySource>& sources,
                                                           std::size_t n) {
  if (n > kTabulateLimit) {
    return [sources](std::size_t j, std::uint32_t v) { return sources[j - 1].at(v); };
  }
  auto table = std::make_shared<std::vector<std::vector<double>>>();
  for (const auto& src : sources) {
    std::vector<double> row(n);
    for (std::size_t v = 1; v <= n; ++v) row[v - 1] = src.at(v);
    table->push_back(std::move(row));
  }
  return [table](std::size_t j, std::uint32_t v) { return (*table)[j - 1][v - 1]; };
}

std::size_t clamp_count(double v) { return v >= 1e18 ? std::size_t{1000000000000000000ULL} : static_cast<std::size_t>(v); }

}  // namespace

void SketchShape::validate() const {
  if (k < 1) throw ConfigError("sketch arity must be at least 1");
  if (n < 1) throw ConfigError("sketch domain must be non-empty");
  if (s_prime > s || s > k) throw ConfigError("sketch shape needs 0 <= s' <= s <= k");
  if (s_prime == k) throw ConfigError("sketch needs at least one Cauchy family (s' < k)");
}

std::vector<IndexedCauchySource> product_cauchy_families(std::uint64_t bank_seed, std::size_t repetition,
                                                         std::size_t families, double omega) {
  const std::uint64_t rep_seed = derive_seed(bank_seed, SeedRole::kSketchBank, repetition);
  std::vector<IndexedCauchySource> out;
  out.reserve(families);
  for (std::size_t j = 1; j <= families; ++j)
    out.emplace_back(derive_seed(rep_seed, SeedRole::kCauchyEpsilon, j), j == 1 ? 0.0 : omega);
  return out;
}

ProductSketchState::ProductSketchState(SketchShape shape, std::vector<ZeroOneHash> hashes,
                                       std::vector<IndexedCauchySource> cauchy)
    : cauchy_(std::move(cauchy)), sketch_(shape, std::move(hashes), cauchy_coefficient(cauchy_, shape.n)) {
  if (cauchy_.size() != shape.families()) throw ConfigError("product sketch needs k - s' Cauchy families");
}

void ProductSketchState::consume(TupleSource& source) {
  if (!(source.shape() == StreamShape{shape().k, shape().n})) throw ConfigError("stream shape does not match sketch");
  std::vector<std::uint32_t> buf(shape().k);
  while (source.next(buf)) update(buf);
}

bool ProductSketchState::compatible(const ProductSketchState& other) const {
  return shape() == other.shape() && sketch_.hashes() == other.sketch_.hashes() && cauchy_ == other.cauchy_;
}

ProductSketchState merge(const ProductSketchState& a, const ProductSketchState& b) {
  if (!a.compatible(b)) throw MergeIncompatible("product sketches were built with different randomness or shapes");
  ProductSketchState out = a;
  out.sketch_.absorb(b.sketch_);
  return out;
}

nlohmann::json ProductSketchState::snapshot() const {
  nlohmann::json hashes = nlohmann::json::array();
  for (const auto& h : sketch_.hashes()) hashes.push_back(h.describe());
  nlohmann::json cauchy = nlohmann::json::array();
  for (const auto& c : cauchy_) cauchy.push_back(c.describe());
  return {
      {"format", "indep.product_sketch"},
      {"version", kSnapshotVersion},
      {"k", shape().k},
      {"n", shape().n},
      {"s", shape().s},
      {"s_prime", shape().s_prime},
      {"hashes", hashes},
      {"cauchy", cauchy},
      {"joint", joint()},
      {"margins", margins()},
      {"m_seen", m_seen()},
  };
}

ProductSketchState ProductSketchState::restore(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "indep.product_sketch")
      throw MalformedInput("not a product sketch snapshot");
    if (j.at("version").get<int>() != kSnapshotVersion) throw MalformedInput("unsupported product sketch version");
    SketchShape shape{j.at("k").get<std::size_t>(), j.at("n").get<std::size_t>(), j.at("s").get<std::size_t>(),
                      j.at("s_prime").get<std::size_t>()};
    std::vector<ZeroOneHash> hashes;
    for (const auto& h : j.at("hashes")) hashes.push_back(ZeroOneHash::from_description(h));
    std::vector<IndexedCauchySource> cauchy;
    for (const auto& c : j.at("cauchy")) cauchy.push_back(IndexedCauchySource::from_description(c));
    ProductSketchState out(shape, std::move(hashes), std::move(cauchy));
    out.sketch_.set_accumulators(j.at("joint").get<double>(), j.at("margins").get<std::vector<double>>(),
                                 j.at("m_seen").get<std::uint64_t>());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("malformed product sketch snapshot: ") + e.what());
  }
}

SketchBank::SketchBank(SketchShape shape, std::vector<ZeroOneHash> hashes, std::size_t repetitions, std::uint64_t seed,
                       SketchPurpose purpose, double omega)
    : shape_(shape), purpose_(purpose) {
  shape_.validate();
  if (repetitions == 0) throw ConfigError("sketch bank needs at least one repetition");
  if (purpose == SketchPurpose::kEpsilon && !(shape.s == shape.k - 1 && shape.s_prime == shape.k - 1))
    throw ConfigError("epsilon bank needs s = s' = k - 1");
  states_.reserve(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r)
    states_.emplace_back(shape, hashes, product_cauchy_families(seed, r, shape.families(), omega));
}

void SketchBank::update(std::span<const std::uint32_t> tuple) {
  for (auto& st : states_) st.update(tuple);
}

void SketchBank::consume(TupleSource& source) {
  if (!(source.shape() == StreamShape{shape_.k, shape_.n})) throw ConfigError("stream shape does not match sketch");
  std::vector<std::uint32_t> buf(shape_.k);
  while (source.next(buf)) update(buf);
}

std::vector<double> SketchBank::absolute_values() const {
  std::vector<double> out;
  out.reserve(states_.size());
  for (const auto& st : states_) out.push_back(std::abs(st.value()));
  return out;
}

std::size_t epsilon_repetitions(double epsilon, double delta, double c) {
  if (!(epsilon > 0 && epsilon < 1)) throw DomainError("epsilon must lie in (0, 1)");
  if (!(delta > 0 && delta < 1)) throw DomainError("delta must lie in (0, 1)");
  return clamp_count(std::ceil(c / (epsilon * epsilon) * std::log(1.0 / delta)));
}

std::size_t polylog_repetitions(double delta, double c) {
  if (!(delta > 0 && delta < 1)) throw DomainError("delta must lie in (0, 1)");
  return clamp_count(std::ceil(c * std::log(1.0 / delta)));
}

double epsilon_l1_estimate(const SketchBank& bank, double epsilon, double delta, double c) {
  if (bank.purpose() != SketchPurpose::kEpsilon) throw ConfigError("epsilon estimate needs an epsilon bank");
  const std::size_t need = epsilon_repetitions(epsilon, delta, c);
  if (bank.repetitions() < need) {
    std::ostringstream os;
    os << "epsilon estimate needs " << need << " repetitions, bank has " << bank.repetitions();
    throw ConfigError(os.str());
  }
  return median(bank.absolute_values());
}

double polylog_l1_estimate(const SketchBank& bank, double delta, double c) {
  const std::size_t need = polylog_repetitions(delta, c);
  if (bank.repetitions() < need) {
    std::ostringstream os;
    os << "polylog estimate needs " << need << " repetitions, bank has " << bank.repetitions();
    throw ConfigError(os.str());
  }
  return median(bank.absolute_values());
}

double polylog_beta(std::size_t n, std::size_t k) {
  const double base = std::max(2.0, std::log2(static_cast<double>(n)));
  return std::pow(base, static_cast<double>(k));
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace indep
