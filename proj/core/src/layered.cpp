#include <algorithm>
#include <cmath>
#include <string>

#include "indep/errors.hpp"
#include "indep/estimator.hpp"
#include "indep/sketches.hpp"

namespace indep {

namespace {

std::size_t ceil_log(double base, double x) {
  if (x <= 1) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(x) / std::log(base) - 1e-12));
}

void recompute_derived(LayerConfig& c) {
  c.zeta = std::pow(1.0 + c.epsilon, 1.0 / static_cast<double>(c.Q)) - 1.0;
  c.c_cover = std::min(c.zeta / (2.0 * (1.0 + c.zeta)), c.epsilon / (4.0 * c.chi * c.chi_prime * c.chi_prime));
}

}  // namespace

LayerConfig LayerConfig::from_paper(double epsilon, std::size_t n, double max_entry, double scale_override) {
  if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("layer epsilon must lie in (0, 1)");
  if (n < 1) throw ConfigError("layer domain must be non-empty");
  if (!(scale_override > 0)) throw ConfigError("scale_override must be positive");
  LayerConfig c;
  c.epsilon = epsilon;
  c.scale_override = scale_override;
  c.levels = ceil_log(1.0 + epsilon, static_cast<double>(n));
  c.layers = ceil_log(1.0 + epsilon, std::max(max_entry, 1.0));
  c.chi_prime = 10.0 * static_cast<double>(std::max<std::size_t>(1, c.levels + c.layers));
  const double eps2 = epsilon * epsilon;
  c.chi = std::max(1.0, std::ceil(std::ceil(16.0 * c.chi_prime / (eps2 * epsilon)) * scale_override));
  c.Q = static_cast<std::size_t>(std::max(1.0, std::ceil(std::ceil(20.0 * c.chi_prime / eps2) * scale_override)));
  c.cover_delta = 1.0 / c.chi_prime;
  recompute_derived(c);
  return c;
}

LayerConfig& LayerConfig::set_chi_q(double chi_value, std::size_t q_count) {
  if (!(chi_value >= 1)) throw ConfigError("chi must be at least 1");
  if (q_count < 1) throw ConfigError("Q must be at least 1");
  chi = chi_value;
  Q = q_count;
  recompute_derived(*this);
  return *this;
}

void LayerConfig::validate() const {
  if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("layer epsilon must lie in (0, 1)");
  if (!(chi >= 1)) throw ConfigError("chi must be at least 1");
  if (Q < 1) throw ConfigError("Q must be at least 1");
  if (!(zeta > 0)) throw ConfigError("zeta must be positive");
}

nlohmann::json LayerConfig::describe() const {
  return {{"epsilon", epsilon},
          {"levels_a", levels},
          {"layers_b", layers},
          {"chi_prime", chi_prime},
          {"chi", chi},
          {"Q", Q},
          {"zeta", zeta},
          {"c_cover", c_cover},
          {"cover_delta", cover_delta},
          {"scale_override", scale_override},
          {"summation", summation == LayerSummation::kAllLayers ? "all_layers" : "positive_layers_only"}};
}

std::int64_t LayerConfig::f_chi(double x) const {
  if (!(x > chi)) throw DomainError("f_chi needs x > chi");
  const double base = 1.0 + epsilon;
  auto f = static_cast<std::int64_t>(std::ceil(std::log(x / chi) / std::log(base)));
  // Pin the bracket chi (1+eps)^(f-1) < x <= chi (1+eps)^f against log rounding.
  while (f > 1 && chi * std::pow(base, static_cast<double>(f - 1)) >= x) --f;
  while (chi * std::pow(base, static_cast<double>(f)) < x) ++f;
  return std::max<std::int64_t>(f, 1);
}

double layered_l1_estimate(const LayerConfig& cfg, const CoverFn& cover, std::uint64_t seed, std::size_t n,
                           LayerTrace* trace) {
  cfg.validate();
  const double base = 1.0 + cfg.epsilon;
  const std::size_t q = derive_seed(seed, SeedRole::kLayerShift) % cfg.Q;
  const double shift = std::pow(1.0 + cfg.zeta, static_cast<double>(q));

  auto layer_of = [&](double v) {
    auto l = static_cast<std::int64_t>(std::floor(std::log(v / shift) / std::log(base)));
    while (shift * std::pow(base, static_cast<double>(l)) > v) --l;
    while (shift * std::pow(base, static_cast<double>(l + 1)) <= v) ++l;
    return l;
  };

  std::map<std::int64_t, std::vector<std::size_t>> counts;
  for (std::size_t j = 0; j <= cfg.levels; ++j) {
    const ZeroOneHash g =
        j == 0 ? ZeroOneHash::ones()
               : ZeroOneHash::threshold(PairwiseHashFamily::zero_one(derive_seed(seed, SeedRole::kLayerLevel, j), n,
                                                                     std::pow(base, -static_cast<double>(j))));
    std::vector<double> values;
    try {
      values = cover(g, derive_seed(seed, SeedRole::kCover, j));
    } catch (const Error& e) {
      rethrow_with_context(e, "layer level " + std::to_string(j) + ": ");
    }
    for (double v : values) {
      if (!(v > 0)) continue;
      auto& row = counts[layer_of(v)];
      row.resize(cfg.levels + 1, 0);
      ++row[j];
    }
  }

  const double low = cfg.chi / (base * base);
  const double high = (1.0 + 3.0 * cfg.epsilon) * cfg.chi;
  double estimate = 0;
  std::map<std::int64_t, std::size_t> chosen;
  for (const auto& [l, row] : counts) {
    if (cfg.summation == LayerSummation::kPositiveLayersOnly && l < 1) continue;
    std::size_t z = 0;
    for (std::size_t j = row.size(); j-- > 1;) {
      const auto y = static_cast<double>(row[j]);
      if (low < y && y <= high) {
        z = j;
        break;
      }
    }
    chosen[l] = z;
    estimate += shift * std::pow(base, static_cast<double>(z) + static_cast<double>(l)) * static_cast<double>(row[z]);
  }
  if (trace) {
    trace->q = q;
    trace->shift = shift;
    trace->counts = std::move(counts);
    trace->chosen_level = std::move(chosen);
  }
  return estimate;
}

void DimensionReductionConfig::validate() const {
  tournament.validate();
  cover.validate();
  layer.validate();
  if (runs < 1) throw ConfigError("dimension reduction needs at least one run");
}

nlohmann::json DimensionReductionConfig::describe() const {
  return {{"tournament", tournament.describe()},
          {"cover", cover.describe()},
          {"layer", layer.describe()},
          {"runs", runs}};
}

double dimension_reduce(const SubAlgorithms& subs, const DimensionReductionConfig& cfg, std::uint64_t seed,
                        std::size_t n, ReductionTrace* trace) {
  cfg.validate();
  if (!subs.approx_A || !subs.approx_B) throw ConfigError("dimension reduction needs both sub-algorithms");
  const ThresholdMax tmax = [&](const ZeroOneHash& mask, std::uint64_t s) {
    return tensor_tournament(mask, cfg.tournament, subs, s, n);
  };
  const CoverFn cover = [&](const ZeroOneHash& mask, std::uint64_t s) {
    std::vector<double> values;
    for (const auto& out : cover_algorithm(mask, cfg.cover, tmax, s, n)) values.push_back(out.value);
    return values;
  };
  std::vector<double> estimates;
  estimates.reserve(cfg.runs);
  for (std::size_t r = 0; r < cfg.runs; ++r)
    estimates.push_back(layered_l1_estimate(cfg.layer, cover, derive_seed(seed, SeedRole::kRun, r), n));
  if (trace) trace->run_estimates = estimates;
  return median(std::move(estimates));
}

}  // namespace indep
