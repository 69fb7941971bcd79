#include "indep/sketch_engine.hpp"

#include <sstream>

#include "indep/errors.hpp"
#include "indep/sketches.hpp"

namespace indep {

namespace {

std::uint64_t pow_checked(std::size_t n, std::size_t s, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < s; ++i) {
    if (v > cap / n) return cap + 1;
    v *= n;
  }
  return v;
}

}  // namespace

SketchEngine::SketchEngine(StreamShape shape, std::vector<EngineKind> kinds, Config config)
    : shape_(shape), kinds_(std::move(kinds)), config_(config) {
  shape_.validate();
  omega_ = config_.omega > 0 ? config_.omega : default_truncation(shape_.k, shape_.n);
  margin_counts_.assign(shape_.k, std::vector<std::uint64_t>(shape_.n, 0));

  std::uint64_t total = 0;
  const std::uint64_t budget = config_.memory_budget;
  for (const auto& kind : kinds_) {
    SketchShape{shape_.k, shape_.n, kind.s, kind.s_prime}.validate();
    if (kind.repetitions == 0) throw ConfigError("sketch kind needs at least one repetition");
    const std::uint64_t prefixes = pow_checked(shape_.n, kind.s, budget);
    const std::uint64_t families = shape_.k - kind.s_prime;
    const std::uint64_t need = (prefixes + families * shape_.n + shape_.k) * kind.repetitions;
    if (prefixes > budget || need > budget || total + need > budget) {
      std::ostringstream os;
      os << "sketch storage for (s=" << kind.s << ", s'=" << kind.s_prime << ", r=" << kind.repetitions
         << ") exceeds the memory budget of " << budget << " values";
      throw BudgetExceeded(os.str());
    }
    total += need;
  }
  stored_ = total;

  for (std::size_t idx = 0; idx < kinds_.size(); ++idx) {
    const auto& kind = kinds_[idx];
    Store store;
    store.kind = kind;
    store.families = shape_.k - kind.s_prime;
    const std::size_t R = kind.repetitions;
    store.cauchy.resize(store.families * shape_.n * R);
    for (std::size_t r = 0; r < R; ++r) {
      const auto sources = product_cauchy_families(kind_seed(idx), r, store.families, omega_);
      for (std::size_t f = 0; f < store.families; ++f)
        for (std::size_t v = 1; v <= shape_.n; ++v) store.cauchy[(f * shape_.n + (v - 1)) * R + r] = sources[f].at(v);
    }
    store.joint.assign(pow_checked(shape_.n, kind.s, budget) * R, 0.0);
    stores_.push_back(std::move(store));
  }
}

std::uint64_t SketchEngine::kind_seed(std::size_t kind) const {
  const auto& k = kinds_.at(kind);
  return derive_seed(config_.seed, SeedRole::kSketchBank, (static_cast<std::uint64_t>(k.s) << 8) | k.s_prime);
}

void SketchEngine::update(std::span<const std::uint32_t> tuple) {
  validate_tuple(shape_, tuple, m_);
  for (std::size_t l = 0; l < shape_.k; ++l) ++margin_counts_[l][tuple[l] - 1];
  for (auto& store : stores_) {
    const std::size_t R = store.kind.repetitions;
    std::size_t prefix = 0;
    for (std::size_t j = 0; j < store.kind.s; ++j) prefix = prefix * shape_.n + (tuple[j] - 1);
    scratch_.assign(R, 1.0);
    for (std::size_t f = 0; f < store.families; ++f) {
      const double* c = store.cauchy.data() + (f * shape_.n + (tuple[store.kind.s_prime + f] - 1)) * R;
      for (std::size_t r = 0; r < R; ++r) scratch_[r] *= c[r];
    }
    double* joint = store.joint.data() + prefix * R;
    for (std::size_t r = 0; r < R; ++r) joint[r] += scratch_[r];
    store.tail_ready = false;
  }
  ++m_;
}

std::uint64_t SketchEngine::consume(TupleSource& source) {
  if (!(source.shape() == shape_)) throw ConfigError("stream shape does not match the sketch engine");
  std::vector<std::uint32_t> buf(shape_.k);
  std::uint64_t read = 0;
  while (source.next(buf)) {
    update(buf);
    ++read;
  }
  return read;
}

void SketchEngine::finish_tail(Store& store) const {
  const std::size_t R = store.kind.repetitions;
  const std::size_t s = store.kind.s;
  const std::size_t sp = store.kind.s_prime;
  store.tail_margins.assign((shape_.k - s) * R, 0.0);
  for (std::size_t j = s + 1; j <= shape_.k; ++j) {
    double* out = store.tail_margins.data() + (j - s - 1) * R;
    const std::size_t f = j - sp - 1;
    for (std::size_t v = 1; v <= shape_.n; ++v) {
      const auto count = static_cast<double>(margin_counts_[j - 1][v - 1]);
      if (count == 0) continue;
      const double* c = store.cauchy.data() + (f * shape_.n + (v - 1)) * R;
      for (std::size_t r = 0; r < R; ++r) out[r] += count * c[r];
    }
  }
  store.tail_ready = true;
}

std::vector<double> SketchEngine::values(std::size_t kind, std::span<const ZeroOneHash> chain) const {
  if (m_ == 0) throw EmptyStream("sketch value needs at least one tuple");
  Store& store = stores_.at(kind);
  const std::size_t R = store.kind.repetitions;
  const std::size_t s = store.kind.s;
  const std::size_t sp = store.kind.s_prime;
  if (chain.size() != s) throw ConfigError("mask chain length must equal the sketch's s");

  std::vector<double> out(R, 0.0);
  std::vector<std::vector<std::uint32_t>> on(s);
  for (std::size_t j = 0; j < s; ++j) {
    for (std::uint32_t v = 1; v <= shape_.n; ++v)
      if (chain[j](v)) on[j].push_back(v);
    if (on[j].empty()) return out;
  }
  if (!store.tail_ready) finish_tail(store);

  // Joint: sum over the masked prefix box.
  std::vector<double> joint(R, 0.0);
  std::vector<std::size_t> pos(s, 0);
  for (bool more = true; more;) {
    std::size_t prefix = 0;
    for (std::size_t j = 0; j < s; ++j) prefix = prefix * shape_.n + (on[j][pos[j]] - 1);
    const double* src = store.joint.data() + prefix * R;
    for (std::size_t r = 0; r < R; ++r) joint[r] += src[r];
    more = false;
    for (std::size_t j = s; j-- > 0;) {
      if (++pos[j] < on[j].size()) {
        more = true;
        break;
      }
      pos[j] = 0;
    }
  }

  double scale = 1.0;
  for (std::size_t j = 1; j < shape_.k; ++j) scale *= static_cast<double>(m_);

  std::vector<double> product(R, 1.0);
  for (std::size_t j = 1; j <= shape_.k; ++j) {
    if (j <= sp) {
      double count = 0;
      for (auto v : on[j - 1]) count += static_cast<double>(margin_counts_[j - 1][v - 1]);
      for (std::size_t r = 0; r < R; ++r) product[r] *= count;
    } else if (j <= s) {
      std::vector<double> margin(R, 0.0);
      const std::size_t f = j - sp - 1;
      for (auto v : on[j - 1]) {
        const auto count = static_cast<double>(margin_counts_[j - 1][v - 1]);
        if (count == 0) continue;
        const double* c = store.cauchy.data() + (f * shape_.n + (v - 1)) * R;
        for (std::size_t r = 0; r < R; ++r) margin[r] += count * c[r];
      }
      for (std::size_t r = 0; r < R; ++r) product[r] *= margin[r];
    } else {
      const double* tail = store.tail_margins.data() + (j - s - 1) * R;
      for (std::size_t r = 0; r < R; ++r) product[r] *= tail[r];
    }
  }
  for (std::size_t r = 0; r < R; ++r) out[r] = guarded_difference(scale * joint[r], product[r]);
  return out;
}

}  // namespace indep
