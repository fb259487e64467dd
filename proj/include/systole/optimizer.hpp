#pragma once

// Random hill climbing of lambda1(L) lambda1(L*) over unit-determinant Gram
// matrices.  The objective is a minimum of finitely many quadratics in G:
// perturb, renormalize det to 1, keep strict improvements, shrink the step
// after a run of rejections.  Half the perturbations are tilted toward the
// common ascent direction of the nearly tied quadratics, which keeps the climb
// moving along the ridges where several minimal vectors compete.

#include <cstdint>
#include <utility>
#include <vector>

#include "systole/lattice.hpp"

namespace systole {

struct OptimizerConfig {
  int restarts = 10;
  int max_iters = 20000;
  double initial_step = 0.1;
  double step_decay = 0.5;
  int reduce_every = 25;
  std::uint64_t seed = 1;
  /// Smallest relative step; below it the step restarts from initial_step.
  double tolerance = 1e-10;
  /// Consecutive rejections before the step is multiplied by step_decay.
  int stall_window = 50;
  /// Step multiplier after an accepted move, capped at initial_step.
  double step_growth = 1.5;

  void validate() const;
};

struct OptimizationTrace {
  GramMatrix best_gram;
  double best_value = 0.0;
  std::vector<std::pair<int, double>> history;  // (iteration, best so far) at each acceptance
  int restart_index = 0;
  int iterations_run = 0;
  int rejected_indefinite = 0;
};

struct BmEstimate {
  OptimizationTrace best;
  std::vector<double> restart_values;  // final value of each restart, in restart order
};

/// G / det(G)^{1/b}.
GramMatrix normalize_det(const GramMatrix& g);

/// One climb from g0; `stream` selects the random stream (restart index).
OptimizationTrace perturb_ascend(const GramMatrix& g0, const OptimizerConfig& config,
                                 int stream = 0);

/// Best of `restarts` climbs from random unit-determinant starts.  Restarts
/// run on SYSTOLE_THREADS worker threads; the result does not depend on it.
BmEstimate estimate_bm_constant(int dim, const OptimizerConfig& config);

struct BoundsReport {
  int dim = 0;
  double value = 0.0;
  double upper_bound = 0.0;  // 2b/3
  bool pass = false;
  // Informational only: the asymptotic window carries an unquantified o(1).
  double asymptotic_low = 0.0;   // b / (2 pi e)
  double asymptotic_high = 0.0;  // b / (pi e)
};

BoundsReport check_bounds(int dim, double value, double tolerance = 1e-9);

/// Deterministic 64-bit stream seed for (seed, stream).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace systole
