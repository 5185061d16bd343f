#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace sirec {

/// One (w0, lambda) candidate.
struct TunePoint {
  double w0 = 0.0;
  double lambda = 0.0;
};

/// Search box with the rounding rules applied to every evaluated point:
/// w0 to the nearest integer, lambda to one decimal place (then clamped so
/// rounded points stay inside the box).  A degenerate range (lo == hi) pins
/// that coordinate.
struct SearchSpace {
  double w0_lo = 10.0, w0_hi = 50.0;
  double lambda_lo = 0.0, lambda_hi = 100.0;

  TunePoint round(TunePoint p) const;
};

/// Ordered evaluation record; best-so-far is non-decreasing by construction.
struct TuneTrace {
  struct Entry {
    TunePoint point;
    double score = 0.0;
  };
  std::vector<Entry> entries;

  /// Index of the highest finite score (first among ties); -1 when none.
  int64_t best_index() const;
  TunePoint best_point() const;
  double best_score() const;
};

/// GP regression posterior with an RBF kernel (length scale 0.2; inputs are
/// expected in the unit box), prior mean = mean of scores, signal variance =
/// sample variance of scores (1.0 fallback when degenerate).  Ill-conditioned
/// kernels escalate the diagonal jitter from `noise` up to 1e-3 before being
/// rejected.
struct GpPosterior {
  std::vector<double> mean;
  std::vector<double> var;  // >= 0
};
GpPosterior gp_posterior(const std::vector<std::array<double, 2>>& points,
                         const std::vector<double>& scores,
                         const std::vector<std::array<double, 2>>& queries, double noise = 1e-6);

/// Expected improvement of a Gaussian (mu, var) over `best`; exact 0 when the
/// predictive spread vanishes and mu <= best.
double expected_improvement(double mu, double var, double best);

/// Sequential model-based search: `init` uniform points then EI-maximizing
/// picks over 1024 seeded uniform candidates per round, every point rounded
/// before evaluation.  Non-finite objective values are recorded as -inf and
/// excluded from the GP fit.  Deterministic given (seed, objective).
TuneTrace bayes_optimize(const std::function<double(TunePoint)>& objective,
                         const SearchSpace& space, int64_t total = 24, int64_t init = 4,
                         uint64_t seed = 1);

}  // namespace sirec
