#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "indep/errors.hpp"
#include "indep/estimator.hpp"

namespace indep {

namespace {

void check_unit(double v, const char* name) {
  if (!(v > 0 && v < 1)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
}

}  // namespace

TournamentConfig TournamentConfig::from_paper(double epsilon, double delta, double beta, double round_constant) {
  check_unit(epsilon, "tournament epsilon");
  check_unit(delta, "tournament delta");
  if (!(beta >= 1)) throw ConfigError("beta must be at least 1");
  if (!(round_constant > 0)) throw ConfigError("round constant must be positive");
  TournamentConfig c;
  c.epsilon = epsilon;
  c.delta = delta;
  c.beta = beta;
  // Rationalized form of 1 - sqrt(1 - eps/2); avoids cancellation for tiny eps.
  c.p = (epsilon / 2.0) / (1.0 + std::sqrt(1.0 - epsilon / 2.0));
  const double log_inv_delta = std::log(1.0 / delta);
  const double rounds = std::ceil(round_constant / c.p * log_inv_delta);
  constexpr double kMaxRounds = static_cast<double>(std::numeric_limits<std::uint32_t>::max());
  c.rounds = static_cast<std::size_t>(std::clamp(rounds, 1.0, kMaxRounds));
  c.delta_prime = c.p * epsilon / (4.0 * log_inv_delta);
  const double quarter = std::pow(1.0 - epsilon, 0.25);
  c.lambda = 1.0 + 2.0 * quarter / (1.0 - quarter);
  c.lambda_prime = (1.0 + epsilon) * c.lambda;
  c.alpha = epsilon / (64.0 * beta * beta);
  return c;
}

void TournamentConfig::validate() const {
  check_unit(epsilon, "tournament epsilon");
  check_unit(delta, "tournament delta");
  check_unit(delta_prime, "tournament delta'");
  if (!(beta >= 1)) throw ConfigError("beta must be at least 1");
  if (rounds < 1) throw ConfigError("tournament needs at least one round");
  if (!(lambda >= 1) || !(lambda_prime >= lambda)) throw ConfigError("tournament lambda must be at least 1");
  check_unit(alpha, "tournament alpha");
}

nlohmann::json TournamentConfig::describe() const {
  return {{"epsilon", epsilon},
          {"delta", delta},
          {"beta", beta},
          {"p", p},
          {"rounds", rounds},
          {"delta_prime", delta_prime},
          {"lambda", lambda},
          {"lambda_prime", lambda_prime},
          {"alpha", alpha},
          {"round_reduction", reduction == RoundReduction::kMinAll ? "min_all" : "min_positive"}};
}

std::pair<double, double> split_compare_ratio(std::span<const double> v, const ZeroOneHash& z) {
  double x = 0;
  double total = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0) throw DomainError("split_compare_ratio needs a non-negative vector");
    total += v[i];
    if (z(i + 1)) x += v[i];
  }
  return {x, total - x};
}

double tensor_tournament(const ZeroOneHash& h, const TournamentConfig& cfg, const SubAlgorithms& subs,
                         std::uint64_t seed, std::size_t n, std::vector<TournamentRound>* trace) {
  const double threshold = cfg.lambda_prime * subs.beta * subs.beta;
  double best = std::numeric_limits<double>::infinity();
  bool any_positive = false;
  if (trace) trace->clear();

  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    const ZeroOneHash z =
        ZeroOneHash::threshold(PairwiseHashFamily::zero_one(derive_seed(seed, SeedRole::kTournamentRound, r), n, 0.5));
    const ZeroOneHash side[2] = {h * z.complement(), h * z};
    double u[2];
    try {
      for (int i = 0; i < 2; ++i) {
        const double t = subs.approx_B(side[i], cfg.epsilon, cfg.delta_prime);
        const double l = subs.approx_A(side[i], cfg.delta_prime);
        u[i] = std::max({l / subs.beta, t, 0.0});
      }
    } catch (const Error& e) {
      rethrow_with_context(e, "tournament round " + std::to_string(r) + ": ");
    }
    double u_prime = 0;
    const bool one_wins = u[1] >= threshold * u[0];
    const bool zero_wins = u[0] >= threshold * u[1];
    if (one_wins && !zero_wins) {
      u_prime = u[1];
    } else if (zero_wins && !one_wins) {
      u_prime = u[0];
    }
    if (trace) trace->push_back({u[0], u[1], u_prime});

    if (cfg.reduction == RoundReduction::kMinAll) {
      best = std::min(best, u_prime);
      if (best == 0) {
        // The minimum cannot drop further; remaining rounds only matter for the trace.
        if (!trace) break;
      }
    } else if (u_prime > 0) {
      any_positive = true;
      best = std::min(best, u_prime);
    }
  }
  if (cfg.reduction == RoundReduction::kMinPositive && !any_positive) return 0.0;
  return std::isfinite(best) ? best : 0.0;
}

}  // namespace indep
