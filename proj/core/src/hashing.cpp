#include "indep/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "indep/errors.hpp"

namespace indep {

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t mod_mersenne61(u128 x) noexcept {
  constexpr std::uint64_t p = PairwiseHashFamily::kPrime;
  std::uint64_t lo = static_cast<std::uint64_t>(x & p);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  r = (r & p) + (r >> 61);
  return r >= p ? r - p : r;
}

// Uniform draw in [0, p) by rejection on 61-bit words.
std::uint64_t field_draw(std::uint64_t& state) noexcept {
  for (;;) {
    state = mix64(state);
    std::uint64_t v = state >> 3;
    if (v < PairwiseHashFamily::kPrime) return v;
  }
}

}  // namespace

PairwiseHashFamily::PairwiseHashFamily(std::uint64_t seed, std::size_t n, Range range, std::uint64_t threshold,
                                       std::uint64_t rho)
    : seed_(seed), n_(n), range_(range), threshold_(threshold), rho_(rho) {
  std::uint64_t state = seed ^ 0x5851f42d4c957f2dULL;
  a_ = field_draw(state);
  b_ = field_draw(state);
}

PairwiseHashFamily PairwiseHashFamily::zero_one(std::uint64_t seed, std::size_t n, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("zero-one hash probability must lie in [0, 1]");
  if (n == 0) throw DomainError("hash domain must be non-empty");
  long double t = std::round(static_cast<long double>(q) * static_cast<long double>(kPrime));
  auto threshold = static_cast<std::uint64_t>(std::clamp<long double>(t, 0.0L, static_cast<long double>(kPrime)));
  return PairwiseHashFamily(seed, n, Range::kZeroOne, threshold, 1);
}

PairwiseHashFamily PairwiseHashFamily::buckets(std::uint64_t seed, std::size_t n, std::uint64_t rho) {
  if (rho == 0) throw DomainError("bucket count must be positive");
  if (n == 0) throw DomainError("hash domain must be non-empty");
  return PairwiseHashFamily(seed, n, Range::kBuckets, 0, rho);
}

double PairwiseHashFamily::probability() const noexcept {
  return static_cast<double>(static_cast<long double>(threshold_) / static_cast<long double>(kPrime));
}

std::uint64_t PairwiseHashFamily::field_value(std::uint64_t x) const noexcept {
  return mod_mersenne61(static_cast<u128>(a_) * (x % kPrime) + b_);
}

void PairwiseHashFamily::check_index(std::size_t i) const {
  if (i < 1 || i > n_) {
    std::ostringstream os;
    os << "hash index " << i << " outside [1, " << n_ << "]";
    throw DomainError(os.str());
  }
}

bool PairwiseHashFamily::eval_zero_one(std::size_t i) const {
  check_index(i);
  return field_value(i) < threshold_;
}

std::uint64_t PairwiseHashFamily::eval_bucket(std::size_t i) const {
  check_index(i);
  return field_value(i) % rho_ + 1;
}

nlohmann::json PairwiseHashFamily::describe() const {
  return {{"seed", seed_},
          {"n", n_},
          {"range", range_ == Range::kZeroOne ? "zero_one" : "buckets"},
          {"threshold", threshold_},
          {"buckets", rho_}};
}

PairwiseHashFamily PairwiseHashFamily::from_description(const nlohmann::json& j) {
  auto range = j.at("range").get<std::string>() == "zero_one" ? Range::kZeroOne : Range::kBuckets;
  return PairwiseHashFamily(j.at("seed").get<std::uint64_t>(), j.at("n").get<std::size_t>(), range,
                            j.at("threshold").get<std::uint64_t>(), j.at("buckets").get<std::uint64_t>());
}

// ---------------------------------------------------------------------------

struct ZeroOneHash::Node {
  enum class Kind { kConstant, kTable, kThreshold, kBucket, kComplement, kProduct };

  Kind kind = Kind::kConstant;
  bool constant = true;
  std::vector<bool> bits;
  PairwiseHashFamily family = PairwiseHashFamily::zero_one(0, 1, 1.0);
  std::uint64_t bucket = 0;
  std::vector<std::shared_ptr<const Node>> children;
  std::uint64_t id = 0;

  bool eval(std::size_t i) const {
    switch (kind) {
      case Kind::kConstant:
        return constant;
      case Kind::kTable:
        if (i < 1 || i > bits.size()) throw DomainError("mask index outside its table");
        return bits[i - 1];
      case Kind::kThreshold:
        return family.eval_zero_one(i);
      case Kind::kBucket:
        return family.eval_bucket(i) == bucket;
      case Kind::kComplement:
        return !children.front()->eval(i);
      case Kind::kProduct:
        for (const auto& c : children)
          if (!c->eval(i)) return false;
        return true;
    }
    return false;
  }
};

namespace {

std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept { return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6))); }

std::uint64_t family_id(const PairwiseHashFamily& f) noexcept {
  std::uint64_t h = combine(0x243f6a8885a308d3ULL, f.seed());
  h = combine(h, f.domain());
  h = combine(h, static_cast<std::uint64_t>(f.range()));
  h = combine(h, f.threshold());
  return combine(h, f.bucket_count());
}

}  // namespace

ZeroOneHash::ZeroOneHash(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

ZeroOneHash::ZeroOneHash() : ZeroOneHash(ones()) {}

ZeroOneHash ZeroOneHash::ones() {
  static const auto node = [] {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::kConstant;
    n->constant = true;
    n->id = 0x1111111111111111ULL;
    return std::shared_ptr<const Node>(n);
  }();
  return ZeroOneHash(node);
}

ZeroOneHash ZeroOneHash::zeros() {
  static const auto node = [] {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::kConstant;
    n->constant = false;
    n->id = 0x2222222222222222ULL;
    return std::shared_ptr<const Node>(n);
  }();
  return ZeroOneHash(node);
}

ZeroOneHash ZeroOneHash::from_bits(std::vector<bool> bits) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kTable;
  std::uint64_t h = combine(0x3333333333333333ULL, bits.size());
  for (bool b : bits) h = combine(h, b ? 1 : 0);
  n->bits = std::move(bits);
  n->id = h;
  return ZeroOneHash(std::move(n));
}

ZeroOneHash ZeroOneHash::threshold(PairwiseHashFamily family) {
  if (family.range() != PairwiseHashFamily::Range::kZeroOne)
    throw DomainError("threshold mask needs a zero-one hash family");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kThreshold;
  n->id = combine(0x4444444444444444ULL, family_id(family));
  n->family = family;
  return ZeroOneHash(std::move(n));
}

ZeroOneHash ZeroOneHash::bucket_indicator(PairwiseHashFamily family, std::uint64_t bucket) {
  if (family.range() != PairwiseHashFamily::Range::kBuckets)
    throw DomainError("bucket mask needs a bucket hash family");
  if (bucket < 1 || bucket > family.bucket_count()) throw DomainError("bucket outside [1, rho]");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kBucket;
  n->id = combine(combine(0x5555555555555555ULL, family_id(family)), bucket);
  n->family = family;
  n->bucket = bucket;
  return ZeroOneHash(std::move(n));
}

ZeroOneHash ZeroOneHash::complement() const {
  if (node_->kind == Node::Kind::kConstant) return node_->constant ? zeros() : ones();
  if (node_->kind == Node::Kind::kComplement) return ZeroOneHash(node_->children.front());
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kComplement;
  n->children.push_back(node_);
  n->id = combine(0x6666666666666666ULL, node_->id);
  return ZeroOneHash(std::move(n));
}

ZeroOneHash ZeroOneHash::operator*(const ZeroOneHash& other) const {
  if (is_constant_one()) return other;
  if (other.is_constant_one()) return *this;
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kProduct;
  auto append = [&](const std::shared_ptr<const Node>& c) {
    if (c->kind == Node::Kind::kProduct)
      n->children.insert(n->children.end(), c->children.begin(), c->children.end());
    else
      n->children.push_back(c);
  };
  append(node_);
  append(other.node_);
  std::uint64_t h = 0x7777777777777777ULL;
  for (const auto& c : n->children) h = combine(h, c->id);
  n->id = h;
  return ZeroOneHash(std::move(n));
}

bool ZeroOneHash::operator()(std::size_t i) const { return node_->eval(i); }

std::uint64_t ZeroOneHash::id() const noexcept { return node_->id; }

bool ZeroOneHash::is_constant_one() const noexcept {
  return node_->kind == Node::Kind::kConstant && node_->constant;
}

nlohmann::json ZeroOneHash::describe() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::kConstant:
      return {{"kind", "constant"}, {"value", n.constant ? 1 : 0}};
    case Node::Kind::kTable: {
      std::vector<int> bits(n.bits.begin(), n.bits.end());
      return {{"kind", "table"}, {"bits", bits}};
    }
    case Node::Kind::kThreshold:
      return {{"kind", "threshold"}, {"family", n.family.describe()}};
    case Node::Kind::kBucket:
      return {{"kind", "bucket"}, {"family", n.family.describe()}, {"bucket", n.bucket}};
    case Node::Kind::kComplement:
      return {{"kind", "complement"}, {"of", ZeroOneHash(n.children.front()).describe()}};
    case Node::Kind::kProduct: {
      auto factors = nlohmann::json::array();
      for (const auto& c : n.children) factors.push_back(ZeroOneHash(c).describe());
      return {{"kind", "product"}, {"factors", factors}};
    }
  }
  return {};
}

ZeroOneHash ZeroOneHash::from_description(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return j.at("value").get<int>() ? ones() : zeros();
  if (kind == "table") {
    std::vector<bool> bits;
    for (const auto& b : j.at("bits")) bits.push_back(b.get<int>() != 0);
    return from_bits(std::move(bits));
  }
  if (kind == "threshold") return threshold(PairwiseHashFamily::from_description(j.at("family")));
  if (kind == "bucket")
    return bucket_indicator(PairwiseHashFamily::from_description(j.at("family")), j.at("bucket").get<std::uint64_t>());
  if (kind == "complement") return from_description(j.at("of")).complement();
  if (kind == "product") {
    ZeroOneHash acc = ones();
    bool first = true;
    for (const auto& f : j.at("factors")) {
      // Rebuild left to right so the flattened id matches the original.
      acc = first ? from_description(f) : acc * from_description(f);
      first = false;
    }
    return acc;
  }
  throw DomainError("unknown mask kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

double cauchy_from_uniform(double u, double omega) {
  constexpr double lo = 0x1.0p-53;
  constexpr double hi = 1.0 - 0x1.0p-53;
  u = std::clamp(u, lo, hi);
  double c = std::tan(std::numbers::pi * (u - 0.5));
  if (omega > 0.0) c = std::clamp(c, -omega, omega);
  return c;
}

double IndexedCauchySource::uniform_at(std::uint64_t i) const noexcept {
  std::uint64_t x = mix64(seed_ ^ mix64(i + 0x632be59bd9b4e019ULL));
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

nlohmann::json IndexedCauchySource::describe() const { return {{"seed", seed_}, {"omega", omega_}}; }

IndexedCauchySource IndexedCauchySource::from_description(const nlohmann::json& j) {
  return IndexedCauchySource(j.at("seed").get<std::uint64_t>(), j.at("omega").get<double>());
}

}  // namespace indep
