#pragma once

// One-pass storage for every product sketch the estimator can ask for.
//
// For a sketch shape (s, s') the Joint accumulator of a mask chain H_1..H_s is
// sum_p H_1(p_1)...H_s(p_s) J[p], where J[p] collects the Cauchy products of
// the tuples whose first s coordinates equal p. The engine keeps J per prefix
// and repetition plus the exact margin counts, so after one pass the state of
// any chain is a linear functional of what was stored. Values agree with a
// ProductSketchState built from the same seeds up to summation order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "indep/hashing.hpp"
#include "indep/stream_core.hpp"

namespace indep {

struct EngineKind {
  std::size_t s = 0;
  std::size_t s_prime = 0;
  std::size_t repetitions = 1;
};

class SketchEngine {
 public:
  struct Config {
    std::uint64_t seed = 0;
    /// Truncation for Cauchy families 2..k-s'; <= 0 selects 100 k n.
    double omega = 0.0;
    /// Upper bound on stored doubles across all kinds.
    std::uint64_t memory_budget = std::uint64_t{1} << 26;
  };

  SketchEngine(StreamShape shape, std::vector<EngineKind> kinds, Config config);

  const StreamShape& shape() const noexcept { return shape_; }
  const std::vector<EngineKind>& kinds() const noexcept { return kinds_; }
  std::uint64_t m() const noexcept { return m_; }
  double omega() const noexcept { return omega_; }
  std::uint64_t stored_doubles() const noexcept { return stored_; }

  /// Seed to hand to SketchBank for an equivalent bank of kind index kind.
  std::uint64_t kind_seed(std::size_t kind) const;

  void update(std::span<const std::uint32_t> tuple);
  /// Reads the source to exhaustion; returns the number of tuples read.
  std::uint64_t consume(TupleSource& source);

  /// Sketch value m^(k-1) Joint - prod Margin_j of every repetition for the mask chain (size s).
  std::vector<double> values(std::size_t kind, std::span<const ZeroOneHash> chain) const;

 private:
  struct Store {
    EngineKind kind;
    std::size_t families = 0;
    // cauchy[(f * n + (v - 1)) * R + r]
    std::vector<double> cauchy;
    // joint[prefix * R + r]
    std::vector<double> joint;
    // Margins of the unmasked coordinates j > s: [(j - s - 1) * R + r].
    std::vector<double> tail_margins;
    bool tail_ready = false;
  };

  void finish_tail(Store& store) const;

  StreamShape shape_;
  std::vector<EngineKind> kinds_;
  Config config_;
  double omega_ = 0;
  std::uint64_t m_ = 0;
  std::uint64_t stored_ = 0;
  std::vector<std::vector<std::uint64_t>> margin_counts_;  // [l][v - 1]
  mutable std::vector<Store> stores_;
  std::vector<double> scratch_;
};

}  // namespace indep
