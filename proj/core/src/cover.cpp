#include <cmath>
#include <set>
#include <string>

#include "indep/errors.hpp"
#include "indep/estimator.hpp"

namespace indep {

CoverConfig CoverConfig::from_paper(double epsilon, double delta, double alpha) {
  CoverConfig c;
  c.epsilon = epsilon;
  c.delta = delta;
  c.alpha = alpha;
  c.epsilon_prime = epsilon * epsilon * delta / 3.0;
  const double rho = std::ceil(1.0 / (c.epsilon_prime * alpha));
  c.rho = rho >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(rho);
  c.validate();
  return c;
}

CoverConfig CoverConfig::with_buckets(double epsilon, double delta, double alpha, std::uint64_t rho) {
  CoverConfig c = from_paper(epsilon, delta, alpha);
  c.rho = rho;
  c.validate();
  return c;
}

void CoverConfig::validate() const {
  if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("cover epsilon must lie in (0, 1)");
  if (!(delta > 0 && delta < 1)) throw ConfigError("cover delta must lie in (0, 1)");
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("cover alpha must lie in (0, 1)");
  if (rho < 1) throw ConfigError("cover needs at least one bucket");
}

nlohmann::json CoverConfig::describe() const {
  return {{"epsilon", epsilon}, {"delta", delta}, {"alpha", alpha}, {"epsilon_prime", epsilon_prime}, {"rho", rho}};
}

std::vector<CoverOutput> cover_algorithm(const ZeroOneHash& h, const CoverConfig& cfg, const ThresholdMax& tmax,
                                         std::uint64_t seed, std::size_t n) {
  const auto family = PairwiseHashFamily::buckets(derive_seed(seed, SeedRole::kCoverBuckets), n, cfg.rho);
  std::set<std::uint64_t> occupied;
  for (std::size_t i = 1; i <= n; ++i)
    if (h(i)) occupied.insert(family.eval_bucket(i));

  std::vector<CoverOutput> out;
  for (auto bucket : occupied) {
    const ZeroOneHash mask = h * ZeroOneHash::bucket_indicator(family, bucket);
    double u;
    try {
      u = tmax(mask, derive_seed(seed, SeedRole::kTournament, bucket));
    } catch (const Error& e) {
      rethrow_with_context(e, "cover bucket " + std::to_string(bucket) + ": ");
    }
    if (u > 0) out.push_back({bucket, u});
  }
  return out;
}

}  // namespace indep
