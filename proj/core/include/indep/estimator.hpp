#pragma once

// Certifying tournaments, covers, the layered L1 estimator and the dimension
// reduction that composes them. Everything here sees the tensor only through
// injected sub-algorithms, so exact dense oracles and streaming sketches are
// interchangeable.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "indep/hashing.hpp"
#include <nlohmann/json.hpp>

namespace indep {

/// The two sub-algorithms for an s-dimensional tensor M.
struct SubAlgorithms {
  /// beta-approximation of |W(M, H)|.
  std::function<double(const ZeroOneHash& h, double delta)> approx_A;
  /// epsilon-approximation of |T_1(W(M, H))|.
  std::function<double(const ZeroOneHash& h, double epsilon, double delta)> approx_B;
  double beta = 1.0;
};

/// How round outputs combine into U.
enum class RoundReduction {
  kMinAll,       ///< minimum over every round, zeros included
  kMinPositive,  ///< minimum over positive rounds, 0 when none
};

struct TournamentConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  double beta = 1.0;
  double p = 0;
  std::size_t rounds = 1;
  double delta_prime = 0;
  double lambda = 0;
  double lambda_prime = 0;
  double alpha = 0;
  RoundReduction reduction = RoundReduction::kMinAll;

  /// Every constant from its formula; rounds = ceil(round_constant / p * ln(1/delta)).
  static TournamentConfig from_paper(double epsilon, double delta, double beta, double round_constant = 1.0);
  void validate() const;
  nlohmann::json describe() const;
};

/// X = sum v_i Z(i) and Y = |V| - X for a non-negative vector (1-based Z).
std::pair<double, double> split_compare_ratio(std::span<const double> v, const ZeroOneHash& z);

/// Per-round record of a tournament.
struct TournamentRound {
  double u0 = 0;
  double u1 = 0;
  double u_prime = 0;
};

/// Algorithm 1 on the masked absolute vector of M. Returns U >= 0.
double tensor_tournament(const ZeroOneHash& h, const TournamentConfig& cfg, const SubAlgorithms& subs,
                         std::uint64_t seed, std::size_t n, std::vector<TournamentRound>* trace = nullptr);

struct CoverConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  double alpha = 0.1;
  double epsilon_prime = 0;
  std::uint64_t rho = 1;

  /// epsilon' = eps^2 delta / 3 and rho = ceil(1 / (epsilon' alpha)).
  static CoverConfig from_paper(double epsilon, double delta, double alpha);
  /// Same, with an explicit bucket count.
  static CoverConfig with_buckets(double epsilon, double delta, double alpha, std::uint64_t rho);
  void validate() const;
  nlohmann::json describe() const;
};

/// A ThresholdMax instance: (mask, seed) -> U.
using ThresholdMax = std::function<double(const ZeroOneHash& mask, std::uint64_t seed)>;

struct CoverOutput {
  std::uint64_t bucket = 0;
  double value = 0;
  friend bool operator==(const CoverOutput&, const CoverOutput&) = default;
};

/// rho ThresholdMax instances on H * [G = s]; returns the positive outputs.
/// Buckets holding no coordinate with H(i) = 1 are skipped: their masks are
/// identically zero and every linear sub-algorithm returns 0 on them.
std::vector<CoverOutput> cover_algorithm(const ZeroOneHash& h, const CoverConfig& cfg, const ThresholdMax& tmax,
                                         std::uint64_t seed, std::size_t n);

enum class LayerSummation {
  kAllLayers,           ///< every layer that received a cover output
  kPositiveLayersOnly,  ///< layers 1..b only
};

struct LayerConfig {
  double epsilon = 0.1;
  std::size_t levels = 0;  ///< a = ceil(log_{1+eps} n)
  std::size_t layers = 0;  ///< b = ceil(log_{1+eps} max_entry)
  double chi_prime = 0;
  double chi = 0;
  std::size_t Q = 1;
  double zeta = 0;
  double c_cover = 0;
  double cover_delta = 0;
  double scale_override = 1.0;
  LayerSummation summation = LayerSummation::kAllLayers;

  /// Formula constants; scale_override multiplies chi and Q.
  static LayerConfig from_paper(double epsilon, std::size_t n, double max_entry, double scale_override = 1.0);
  /// Replaces chi and Q and recomputes zeta and c_cover.
  LayerConfig& set_chi_q(double chi, std::size_t q_count);
  void validate() const;
  nlohmann::json describe() const;

  /// ceil(log_{1+eps}(x / chi)) for x > chi.
  std::int64_t f_chi(double x) const;
};

/// A cover for the vector under a mask: (mask, seed) -> positive values.
using CoverFn = std::function<std::vector<double>(const ZeroOneHash& mask, std::uint64_t seed)>;

struct LayerTrace {
  std::size_t q = 0;
  double shift = 1.0;
  /// counts[l][j] = Y_{l, j}
  std::map<std::int64_t, std::vector<std::size_t>> counts;
  std::map<std::int64_t, std::size_t> chosen_level;
};

/// Algorithm 2. levels + 1 covers (level 0 unsampled).
double layered_l1_estimate(const LayerConfig& cfg, const CoverFn& cover, std::uint64_t seed, std::size_t n,
                           LayerTrace* trace = nullptr);

struct DimensionReductionConfig {
  TournamentConfig tournament;
  CoverConfig cover;
  LayerConfig layer;
  std::size_t runs = 1;

  void validate() const;
  nlohmann::json describe() const;
};

struct ReductionTrace {
  std::vector<double> run_estimates;
};

/// Median over runs of layered(cover(tournament(subs))): an approximation of |M|.
double dimension_reduce(const SubAlgorithms& subs, const DimensionReductionConfig& cfg, std::uint64_t seed,
                        std::size_t n, ReductionTrace* trace = nullptr);

}  // namespace indep
