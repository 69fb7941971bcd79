#include "indep/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "indep/errors.hpp"
#include "indep/sketches.hpp"

namespace indep {

namespace {

// Tuple counts assumed when constants must be fixed before the pass.
constexpr double kFormulaTupleBound = 4294967296.0;

DenseTensor masked_sum(const DenseTensor& m, std::span<const ZeroOneHash> chain, std::size_t t) {
  return suffix_sum(prefix_zero(m, chain), t);
}

using CacheKey = std::vector<std::uint64_t>;

void append_bits(CacheKey& key, const ZeroOneHash& h, std::size_t n) {
  std::uint64_t word = 0;
  std::size_t used = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    word |= static_cast<std::uint64_t>(h(i)) << used;
    if (++used == 64) {
      key.push_back(word);
      word = 0;
      used = 0;
    }
  }
  if (used) key.push_back(word);
}

class Recursion {
 public:
  Recursion(NormOracle& oracle, std::span<const DimensionReductionConfig> configs, std::uint64_t seed,
            ApproximationTrace* trace, double work_budget)
      : oracle_(oracle), configs_(configs), seed_(seed), trace_(trace), work_budget_(work_budget) {}

  double work() const noexcept { return work_; }

  double reduce(std::size_t depth, const std::vector<ZeroOneHash>& prefix, ReductionTrace* rt) {
    const std::size_t k = oracle_.k();
    const std::size_t n = oracle_.n();
    SubAlgorithms subs;
    subs.beta = oracle_.beta();
    subs.approx_A = [this, depth, &prefix, n](const ZeroOneHash& h, double delta) {
      auto chain = extend(prefix, h);
      return cached(key(0, depth, chain, n), [&] {
        if (trace_) ++trace_->polylog_queries;
        charge(oracle_.query_cost(chain.size(), false));
        return oracle_.polylog(chain, delta);
      });
    };
    subs.approx_B = [this, depth, &prefix, n, k](const ZeroOneHash& h, double eps, double delta) {
      auto chain = extend(prefix, h);
      return cached(key(1, depth, chain, n), [&] {
        if (depth + 2 == k) {
          if (trace_) ++trace_->epsilon_queries;
          charge(oracle_.query_cost(chain.size(), true));
          return oracle_.epsilon(chain, eps, delta);
        }
        if (trace_) ++trace_->nested_reductions;
        try {
          return reduce(depth + 1, chain, nullptr);
        } catch (const Error& e) {
          rethrow_with_context(e, "depth " + std::to_string(depth + 1) + ": ");
        }
      });
    };
    return dimension_reduce(subs, configs_[depth], derive_seed(seed_, SeedRole::kDepth, depth), n, rt);
  }

 private:
  static std::vector<ZeroOneHash> extend(const std::vector<ZeroOneHash>& prefix, const ZeroOneHash& h) {
    std::vector<ZeroOneHash> chain = prefix;
    chain.push_back(h);
    return chain;
  }

  static CacheKey key(std::uint64_t kind, std::size_t depth, const std::vector<ZeroOneHash>& chain, std::size_t n) {
    CacheKey k{kind, depth, chain.size()};
    for (const auto& h : chain) append_bits(k, h, n);
    return k;
  }

  void charge(double cost) {
    work_ += cost;
    if (work_ > work_budget_) {
      std::ostringstream os;
      os << "estimator work " << work_ << " exceeds work_budget " << work_budget_;
      throw BudgetExceeded(os.str());
    }
  }

  template <class F>
  double cached(CacheKey k, F&& compute) {
    if (auto it = cache_.find(k); it != cache_.end()) {
      if (trace_) ++trace_->cache_hits;
      return it->second;
    }
    const double v = compute();
    cache_.emplace(std::move(k), v);
    return v;
  }

  NormOracle& oracle_;
  std::span<const DimensionReductionConfig> configs_;
  std::uint64_t seed_;
  ApproximationTrace* trace_;
  double work_budget_;
  double work_ = 0;
  std::map<CacheKey, double> cache_;
};

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError("override " + key + ": cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("override " + key + ": expected true or false, got '" + value + "'");
}

}  // namespace

ExactTensorOracle::ExactTensorOracle(DenseTensor m, double beta) : m_(std::move(m)), beta_(beta) {
  if (m_.dims() < 1) throw ConfigError("exact oracle needs a tensor of dimension at least 1");
  if (!(beta_ >= 1)) throw ConfigError("beta must be at least 1");
}

double ExactTensorOracle::polylog(std::span<const ZeroOneHash> chain, double) {
  if (chain.empty() || chain.size() > m_.dims()) throw ConfigError("mask chain length out of range");
  return l1_norm_double(masked_sum(m_, chain, chain.size() - 1));
}

double ExactTensorOracle::epsilon(std::span<const ZeroOneHash> chain, double, double) {
  if (chain.empty() || chain.size() > m_.dims()) throw ConfigError("mask chain length out of range");
  return l1_norm_double(masked_sum(m_, chain, chain.size()));
}

SubAlgorithms exact_sub_algorithms(const DenseTensor& m, double beta) {
  SubAlgorithms subs;
  subs.beta = beta;
  subs.approx_A = [m](const ZeroOneHash& h, double) {
    const ZeroOneHash chain[1] = {h};
    return l1_norm_double(prefix_zero(m, chain));
  };
  subs.approx_B = [m](const ZeroOneHash& h, double, double) {
    const ZeroOneHash chain[1] = {h};
    return l1_norm_double(suffix_sum(prefix_zero(m, chain), 1));
  };
  return subs;
}

SketchEngine make_pipeline_engine(StreamShape shape, std::size_t epsilon_reps, std::size_t polylog_reps,
                                  std::uint64_t seed, double omega, std::uint64_t memory_budget) {
  if (shape.k < 2) throw ConfigError("the estimator needs k >= 2");
  std::vector<EngineKind> kinds;
  for (std::size_t d = 0; d + 1 < shape.k; ++d) kinds.push_back({d + 1, d, polylog_reps});
  kinds.push_back({shape.k - 1, shape.k - 1, epsilon_reps});
  return SketchEngine(shape, std::move(kinds), {seed, omega, memory_budget});
}

SketchNormOracle::SketchNormOracle(const SketchEngine& engine) : engine_(engine) {
  const std::size_t k = engine_.shape().k;
  if (engine_.kinds().size() != k) throw ConfigError("engine was not built by make_pipeline_engine");
}

double SketchNormOracle::beta() const { return polylog_beta(n(), k()); }

double SketchNormOracle::polylog(std::span<const ZeroOneHash> chain, double) {
  if (chain.empty() || chain.size() >= k()) throw ConfigError("polylog chain length must lie in [1, k-1]");
  auto values = engine_.values(chain.size() - 1, chain);
  for (auto& v : values) v = std::abs(v);
  return median(std::move(values));
}

double SketchNormOracle::epsilon(std::span<const ZeroOneHash> chain, double, double) {
  if (chain.size() + 1 != k()) throw ConfigError("epsilon chain length must equal k-1");
  auto values = engine_.values(k() - 1, chain);
  for (auto& v : values) v = std::abs(v);
  return median(std::move(values));
}

double NormOracle::query_cost(std::size_t chain_length, bool) const {
  return std::pow(static_cast<double>(n()), static_cast<double>(chain_length));
}

double SketchNormOracle::query_cost(std::size_t chain_length, bool epsilon_query) const {
  const auto& kind = engine_.kinds()[epsilon_query ? k() - 1 : chain_length - 1];
  return static_cast<double>(kind.repetitions) * NormOracle::query_cost(chain_length, epsilon_query);
}

double approximate_tensor(NormOracle& oracle, std::span<const DimensionReductionConfig> configs, std::uint64_t seed,
                          ApproximationTrace* trace, double work_budget) {
  if (oracle.k() < 2) throw ConfigError("approximate_tensor needs a tensor of dimension at least 2");
  if (configs.size() + 1 != oracle.k()) throw ConfigError("need one reduction config per depth 0..k-2");
  Recursion rec(oracle, configs, seed, trace, work_budget);
  ReductionTrace top;
  const double out = rec.reduce(0, {}, &top);
  if (trace) {
    trace->top_level_runs = top.run_estimates;
    trace->work = rec.work();
  }
  return out;
}

void PipelineConfig::apply_override(const std::string& key, const std::string& value) {
  if (key == "epsilon") {
    epsilon = parse_number<double>(key, value);
  } else if (key == "delta") {
    delta = parse_number<double>(key, value);
  } else if (key == "layer_epsilon") {
    layer_epsilon = parse_number<double>(key, value);
  } else if (key == "cover_epsilon") {
    cover_epsilon = parse_number<double>(key, value);
  } else if (key == "sub_delta") {
    sub_delta = parse_number<double>(key, value);
  } else if (key == "tournament_rounds") {
    tournament_rounds = parse_number<std::size_t>(key, value);
  } else if (key == "cover_buckets") {
    cover_buckets = parse_number<std::uint64_t>(key, value);
  } else if (key == "chi") {
    chi = parse_number<double>(key, value);
  } else if (key == "Q") {
    Q = parse_number<std::size_t>(key, value);
  } else if (key == "scale_override") {
    scale_override = parse_number<double>(key, value);
  } else if (key == "runs") {
    runs = parse_number<std::size_t>(key, value);
  } else if (key == "epsilon_rep_constant") {
    epsilon_rep_constant = parse_number<double>(key, value);
  } else if (key == "polylog_rep_constant") {
    polylog_rep_constant = parse_number<double>(key, value);
  } else if (key == "epsilon_reps") {
    epsilon_reps = parse_number<std::size_t>(key, value);
  } else if (key == "polylog_reps") {
    polylog_reps = parse_number<std::size_t>(key, value);
  } else if (key == "omega") {
    omega = parse_number<double>(key, value);
  } else if (key == "paper_constants") {
    paper_constants = parse_bool(key, value);
  } else if (key == "round_reduction") {
    if (value == "min_all") {
      round_reduction = RoundReduction::kMinAll;
    } else if (value == "min_positive") {
      round_reduction = RoundReduction::kMinPositive;
    } else {
      throw ConfigError("override round_reduction: expected min_all or min_positive");
    }
  } else if (key == "layer_summation") {
    if (value == "all_layers") {
      layer_summation = LayerSummation::kAllLayers;
    } else if (value == "positive_layers_only") {
      layer_summation = LayerSummation::kPositiveLayersOnly;
    } else {
      throw ConfigError("override layer_summation: expected all_layers or positive_layers_only");
    }
  } else if (key == "work_budget") {
    work_budget = parse_number<double>(key, value);
  } else if (key == "memory_budget") {
    memory_budget = parse_number<std::uint64_t>(key, value);
  } else {
    throw ConfigError("unknown override key '" + key + "'");
  }
}

void PipelineConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v > 0 && v < 1)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
  };
  unit(epsilon, "epsilon");
  unit(delta, "delta");
  unit(effective_layer_epsilon(), "layer_epsilon");
  unit(cover_epsilon, "cover_epsilon");
  unit(sub_delta, "sub_delta");
  if (tournament_rounds < 1) throw ConfigError("tournament_rounds must be at least 1");
  if (!(chi >= 1)) throw ConfigError("chi must be at least 1");
  if (Q < 1) throw ConfigError("Q must be at least 1");
  if (scale_override < 0) throw ConfigError("scale_override must be non-negative");
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (!(epsilon_rep_constant > 0) || !(polylog_rep_constant > 0)) throw ConfigError("repetition constants must be positive");
  if (omega < 0) throw ConfigError("omega must be non-negative");
  if (!(work_budget > 0)) throw ConfigError("work_budget must be positive");
}

nlohmann::json PipelineConfig::describe() const {
  return {{"epsilon", epsilon},
          {"delta", delta},
          {"layer_epsilon", effective_layer_epsilon()},
          {"cover_epsilon", cover_epsilon},
          {"sub_delta", sub_delta},
          {"tournament_rounds", tournament_rounds},
          {"cover_buckets", cover_buckets},
          {"chi", chi},
          {"Q", Q},
          {"scale_override", scale_override},
          {"runs", runs},
          {"epsilon_rep_constant", epsilon_rep_constant},
          {"polylog_rep_constant", polylog_rep_constant},
          {"epsilon_reps", effective_epsilon_reps()},
          {"polylog_reps", effective_polylog_reps()},
          {"omega", omega},
          {"paper_constants", paper_constants},
          {"round_reduction", round_reduction == RoundReduction::kMinAll ? "min_all" : "min_positive"},
          {"layer_summation", layer_summation == LayerSummation::kAllLayers ? "all_layers" : "positive_layers_only"},
          {"work_budget", work_budget},
          {"memory_budget", memory_budget}};
}

std::uint64_t PipelineConfig::effective_buckets(std::size_t n) const {
  if (cover_buckets > 0) return cover_buckets;
  const double want = 4.0 * static_cast<double>(n) * static_cast<double>(n);
  return static_cast<std::uint64_t>(std::clamp(want, 16.0, 4096.0));
}

std::size_t PipelineConfig::effective_epsilon_reps() const {
  return epsilon_reps > 0 ? epsilon_reps : epsilon_repetitions(cover_epsilon, sub_delta, epsilon_rep_constant);
}

std::size_t PipelineConfig::effective_polylog_reps() const {
  return polylog_reps > 0 ? polylog_reps : polylog_repetitions(sub_delta, polylog_rep_constant);
}

std::vector<DimensionReductionConfig> reduction_configs(const PipelineConfig& cfg, std::size_t k, std::size_t n,
                                                        std::uint64_t m, double beta) {
  cfg.validate();
  if (k < 2) throw ConfigError("the estimator needs k >= 2");
  const double max_entry = 2.0 * std::pow(static_cast<double>(std::max<std::uint64_t>(m, 1)), static_cast<double>(k));
  std::vector<DimensionReductionConfig> out;
  for (std::size_t d = 0; d + 1 < k; ++d) {
    DimensionReductionConfig rc;
    if (cfg.paper_constants) {
      rc.layer = LayerConfig::from_paper(cfg.effective_layer_epsilon(), n, max_entry,
                                         cfg.scale_override > 0 ? cfg.scale_override : 1.0);
      rc.tournament = TournamentConfig::from_paper(rc.layer.c_cover, rc.layer.cover_delta, beta);
      rc.cover = CoverConfig::from_paper(rc.layer.c_cover, rc.layer.cover_delta, rc.tournament.alpha);
      rc.runs = static_cast<std::size_t>(std::ceil(24.0 * std::log(1.0 / cfg.delta)));
    } else {
      if (cfg.scale_override > 0) {
        rc.layer = LayerConfig::from_paper(cfg.effective_layer_epsilon(), n, max_entry, cfg.scale_override);
      } else {
        rc.layer = LayerConfig::from_paper(cfg.effective_layer_epsilon(), n, max_entry);
        rc.layer.set_chi_q(cfg.chi, cfg.Q);
      }
      rc.tournament = TournamentConfig::from_paper(cfg.cover_epsilon, cfg.sub_delta, beta);
      rc.tournament.rounds = cfg.tournament_rounds;
      rc.tournament.delta_prime = cfg.sub_delta;
      rc.cover = CoverConfig::with_buckets(cfg.cover_epsilon, cfg.sub_delta, rc.tournament.alpha,
                                           cfg.effective_buckets(n));
      rc.runs = cfg.runs;
    }
    rc.layer.summation = cfg.layer_summation;
    rc.tournament.reduction = cfg.round_reduction;
    rc.validate();
    out.push_back(rc);
  }
  return out;
}

nlohmann::json paper_constants_summary(const PipelineConfig& cfg, std::size_t k, std::size_t n, std::uint64_t m) {
  PipelineConfig paper = cfg;
  paper.paper_constants = true;
  paper.scale_override = 0;
  const auto configs = reduction_configs(paper, k, n, m, polylog_beta(n, k));
  const auto& top = configs.front();
  return {{"reduction", top.describe()},
          {"epsilon_reps",
           epsilon_repetitions(top.tournament.epsilon, top.tournament.delta_prime, cfg.epsilon_rep_constant)},
          {"polylog_reps", polylog_repetitions(top.tournament.delta_prime, 64.0)}};
}

std::pair<std::size_t, std::size_t> sketch_repetitions(const PipelineConfig& cfg,
                                                       std::span<const DimensionReductionConfig> configs) {
  if (!cfg.paper_constants || configs.empty()) return {cfg.effective_epsilon_reps(), cfg.effective_polylog_reps()};
  const auto& t = configs.back().tournament;
  const std::size_t eps = cfg.epsilon_reps > 0 ? cfg.epsilon_reps
                                               : epsilon_repetitions(t.epsilon, t.delta_prime, cfg.epsilon_rep_constant);
  const std::size_t poly = cfg.polylog_reps > 0 ? cfg.polylog_reps : polylog_repetitions(t.delta_prime, 64.0);
  return {eps, poly};
}

double worst_case_work(const PipelineConfig& cfg, std::span<const DimensionReductionConfig> configs, std::size_t k,
                         std::size_t n) {
  const auto [eps_reps, poly_reps] = sketch_repetitions(cfg, configs);
  const double nd = static_cast<double>(n);
  double calls = 1;
  double work = 0;
  for (std::size_t d = 0; d < configs.size(); ++d) {
    const auto& c = configs[d];
    const double buckets = std::min(static_cast<double>(c.cover.rho), nd);
    calls *= static_cast<double>(c.runs) * static_cast<double>(c.layer.levels + 1) * buckets *
             static_cast<double>(c.tournament.rounds) * 2.0;
    work += calls * static_cast<double>(poly_reps) * std::pow(nd, static_cast<double>(d + 1));
    if (d + 2 == k) work += calls * static_cast<double>(eps_reps) * std::pow(nd, static_cast<double>(k - 1));
  }
  return work;
}

EstimateReport independence_distance(TupleSource& source, const PipelineConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const StreamShape shape = source.shape();
  shape.validate();
  if (shape.k < 2) throw ConfigError("the estimator needs k >= 2");
  const double beta = polylog_beta(shape.n, shape.k);

  // Query structure does not depend on m outside formula-constant mode, so planning with a
  // bound is exact there; formula-constant mode keeps the bound throughout.
  const auto planned =
      reduction_configs(cfg, shape.k, shape.n, static_cast<std::uint64_t>(kFormulaTupleBound), beta);
  const double worst_work = worst_case_work(cfg, planned, shape.k, shape.n);
  const auto [eps_reps, poly_reps] = sketch_repetitions(cfg, planned);

  SketchEngine engine = make_pipeline_engine(shape, eps_reps, poly_reps, derive_seed(seed, SeedRole::kSketchBank),
                                             cfg.omega, cfg.memory_budget);
  const std::uint64_t m = engine.consume(source);
  if (m == 0) throw EmptyStream();

  const auto configs = cfg.paper_constants ? planned : reduction_configs(cfg, shape.k, shape.n, m, beta);
  SketchNormOracle oracle(engine);
  ApproximationTrace trace;
  const double norm = approximate_tensor(oracle, configs, derive_seed(seed, SeedRole::kRun), &trace, cfg.work_budget);
  const double raw = distance_from_tensor_norm(norm, m, shape.k);

  EstimateReport report;
  report.distance_estimate = std::clamp(raw, 0.0, 1.0);
  report.m = m;
  report.n = shape.n;
  report.k = shape.k;
  report.mode = RunMode::kSketch;
  report.seed = seed;

  auto& diag = report.diagnostics;
  diag["config"] = cfg.describe();
  nlohmann::json depths = nlohmann::json::array();
  for (const auto& c : configs) depths.push_back(c.describe());
  diag["reductions"] = depths;
  diag["beta"] = beta;
  diag["omega"] = engine.omega();
  diag["epsilon_reps"] = eps_reps;
  diag["polylog_reps"] = poly_reps;
  diag["stored_values"] = engine.stored_doubles();
  diag["worst_case_work"] = worst_work;
  diag["work"] = trace.work;
  diag["tensor_norm_estimate"] = norm;
  diag["raw_distance_estimate"] = raw;
  std::vector<double> run_distances;
  for (double r : trace.top_level_runs) run_distances.push_back(distance_from_tensor_norm(r, m, shape.k));
  diag["run_distance_estimates"] = run_distances;
  diag["queries"] = {{"polylog", trace.polylog_queries},
                     {"epsilon", trace.epsilon_queries},
                     {"nested_reductions", trace.nested_reductions},
                     {"cache_hits", trace.cache_hits}};
  diag["paper_formulas"] = paper_constants_summary(cfg, shape.k, shape.n, m);
  return report;
}

}  // namespace indep
