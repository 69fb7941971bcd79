#pragma once

// The recursive approximation of |M_Ind| and the end-to-end distance estimate.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "indep/estimator.hpp"
#include "indep/report.hpp"
#include "indep/sketch_engine.hpp"
#include "indep/stream_core.hpp"
#include "indep/tensor_ops.hpp"

namespace indep {

/// Norm queries on a k-dimensional tensor M under a mask chain H_1..H_c.
class NormOracle {
 public:
  virtual ~NormOracle() = default;
  virtual std::size_t k() const = 0;
  virtual std::size_t n() const = 0;
  /// Approximation factor of polylog().
  virtual double beta() const = 0;
  /// beta-approximation of |T_{c-1}(W(M, H_1..H_c))|.
  virtual double polylog(std::span<const ZeroOneHash> chain, double delta) = 0;
  /// epsilon-approximation of |T_c(W(M, H_1..H_c))|.
  virtual double epsilon(std::span<const ZeroOneHash> chain, double eps, double delta) = 0;
  /// Work units charged for one uncached query on a chain of this length.
  virtual double query_cost(std::size_t chain_length, bool epsilon_query) const;
};

/// Answers from a dense tensor, exactly.
class ExactTensorOracle : public NormOracle {
 public:
  explicit ExactTensorOracle(DenseTensor m, double beta = 1.0);
  std::size_t k() const override { return m_.dims(); }
  std::size_t n() const override { return m_.extent(); }
  double beta() const override { return beta_; }
  double polylog(std::span<const ZeroOneHash> chain, double delta) override;
  double epsilon(std::span<const ZeroOneHash> chain, double eps, double delta) override;
  const DenseTensor& tensor() const noexcept { return m_; }

 private:
  DenseTensor m_;
  double beta_;
};

/// Exact sub-algorithms for dimension_reduce on M: |W(M, H)| and |T_1(W(M, H))|.
SubAlgorithms exact_sub_algorithms(const DenseTensor& m, double beta = 1.0);

/// Kinds registered by make_pipeline_engine: polylog kinds (d+1, d) for d = 0..k-2
/// at indices 0..k-2, and the epsilon kind (k-1, k-1) at index k-1.
SketchEngine make_pipeline_engine(StreamShape shape, std::size_t epsilon_reps, std::size_t polylog_reps,
                                  std::uint64_t seed, double omega, std::uint64_t memory_budget);

/// Answers from a SketchEngine built by make_pipeline_engine.
///
/// Repetition counts are fixed when the engine is built; the per-call delta and
/// epsilon arguments do not change them.
class SketchNormOracle : public NormOracle {
 public:
  explicit SketchNormOracle(const SketchEngine& engine);
  std::size_t k() const override { return engine_.shape().k; }
  std::size_t n() const override { return engine_.shape().n; }
  double beta() const override;
  double polylog(std::span<const ZeroOneHash> chain, double delta) override;
  double epsilon(std::span<const ZeroOneHash> chain, double eps, double delta) override;
  double query_cost(std::size_t chain_length, bool epsilon_query) const override;

 private:
  const SketchEngine& engine_;
};

struct ApproximationTrace {
  std::vector<double> top_level_runs;
  std::uint64_t polylog_queries = 0;
  std::uint64_t epsilon_queries = 0;
  std::uint64_t nested_reductions = 0;
  std::uint64_t cache_hits = 0;
  double work = 0;
};

/// Recursive dimension reduction from depth 0 to k-2. configs[d] drives depth d
/// and must have k-1 entries.
///
/// Randomness is shared by sibling calls at the same depth, so every query is a
/// deterministic function of the mask chain's values on [1, n]; answers are
/// cached on those values.
///
/// Uncached queries are charged oracle.query_cost; passing work_budget throws
/// BudgetExceeded as soon as the total exceeds it.
double approximate_tensor(NormOracle& oracle, std::span<const DimensionReductionConfig> configs, std::uint64_t seed,
                          ApproximationTrace* trace = nullptr,
                          double work_budget = std::numeric_limits<double>::infinity());

/// Estimator configuration. Defaults are desk-scale; paper_constants switches
/// every constant to its formula.
struct PipelineConfig {
  double epsilon = 0.3;
  double delta = 0.1;
  /// Layer precision; 0 selects epsilon / 3.
  double layer_epsilon = 0;
  /// Tournament precision and cover precision.
  double cover_epsilon = 0.2;
  /// Failure probability handed to every sub-call and used for repetition counts.
  double sub_delta = 0.05;
  std::size_t tournament_rounds = 8;
  /// 0 selects clamp(4 n^2, 16, 4096).
  std::uint64_t cover_buckets = 0;
  double chi = 64;
  std::size_t Q = 16;
  /// When positive, chi and Q come from their formulas scaled by this factor.
  double scale_override = 0;
  std::size_t runs = 9;
  double epsilon_rep_constant = 8;
  double polylog_rep_constant = 16;
  /// 0 derives the count from the constant.
  std::size_t epsilon_reps = 0;
  std::size_t polylog_reps = 0;
  /// 0 selects 100 k n.
  double omega = 0;
  bool paper_constants = false;
  RoundReduction round_reduction = RoundReduction::kMinAll;
  LayerSummation layer_summation = LayerSummation::kAllLayers;
  /// Upper bound on planned (query x repetition x prefix) work.
  double work_budget = 2e10;
  std::uint64_t memory_budget = std::uint64_t{1} << 26;

  /// KEY=VALUE override; throws ConfigError on unknown keys or bad values.
  void apply_override(const std::string& key, const std::string& value);
  void validate() const;
  nlohmann::json describe() const;

  double effective_layer_epsilon() const { return layer_epsilon > 0 ? layer_epsilon : epsilon / 3.0; }
  std::uint64_t effective_buckets(std::size_t n) const;
  std::size_t effective_epsilon_reps() const;
  std::size_t effective_polylog_reps() const;
};

/// Per-depth reduction configs for a stream of shape (k, n) with m tuples.
std::vector<DimensionReductionConfig> reduction_configs(const PipelineConfig& cfg, std::size_t k, std::size_t n,
                                                        std::uint64_t m, double beta);

/// The constants the formulas give for this shape, for the report.
nlohmann::json paper_constants_summary(const PipelineConfig& cfg, std::size_t k, std::size_t n, std::uint64_t m);

/// Work if no query were ever repeated. Caching usually keeps the real figure
/// orders of magnitude lower; cfg.work_budget is enforced on the real figure.
double worst_case_work(const PipelineConfig& cfg, std::span<const DimensionReductionConfig> configs, std::size_t k,
                         std::size_t n);

/// One pass over the source, then the recursive estimate. The report's mode is sketch.
EstimateReport independence_distance(TupleSource& source, const PipelineConfig& cfg, std::uint64_t seed);

}  // namespace indep
