#include "core/hypertune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace sirec {

namespace {

constexpr double kLengthScale = 0.2;
constexpr double kMaxJitter = 1e-3;
constexpr int64_t kCandidates = 1024;

double round_to(double v, double step) { return std::round(v / step) * step; }

double rbf(const std::array<double, 2>& a, const std::array<double, 2>& b, double sigma_sq) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return sigma_sq * std::exp(-(dx * dx + dy * dy) / (2.0 * kLengthScale * kLengthScale));
}

// In-place Cholesky of a symmetric positive-definite matrix; false on failure.
bool cholesky(std::vector<double>& a, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (int64_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (!(sum > 0.0)) return false;
        a[i * n + i] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
  return true;
}

// Solve L L^T x = b given the Cholesky factor in the lower triangle.
void cholesky_solve(const std::vector<double>& l, int64_t n, std::vector<double>& b) {
  for (int64_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (int64_t k = 0; k < i; ++k) sum -= l[i * n + k] * b[k];
    b[i] = sum / l[i * n + i];
  }
  for (int64_t i = n - 1; i >= 0; --i) {
    double sum = b[i];
    for (int64_t k = i + 1; k < n; ++k) sum -= l[k * n + i] * b[k];
    b[i] = sum / l[i * n + i];
  }
}

double clamp_round(double v, double step, double lo, double hi) {
  if (lo == hi) return lo;
  return std::clamp(round_to(v, step), lo, hi);
}

std::array<double, 2> to_unit(const SearchSpace& s, TunePoint p) {
  const double u = s.w0_hi > s.w0_lo ? (p.w0 - s.w0_lo) / (s.w0_hi - s.w0_lo) : 0.0;
  const double v =
      s.lambda_hi > s.lambda_lo ? (p.lambda - s.lambda_lo) / (s.lambda_hi - s.lambda_lo) : 0.0;
  return {u, v};
}

}  // namespace

TunePoint SearchSpace::round(TunePoint p) const {
  return {clamp_round(p.w0, 1.0, w0_lo, w0_hi), clamp_round(p.lambda, 0.1, lambda_lo, lambda_hi)};
}

int64_t TuneTrace::best_index() const {
  int64_t best = -1;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(entries[i].score)) continue;
    if (best < 0 || entries[i].score > entries[static_cast<size_t>(best)].score) {
      best = static_cast<int64_t>(i);
    }
  }
  return best;
}

TunePoint TuneTrace::best_point() const {
  const int64_t i = best_index();
  require(i >= 0, ErrCode::numeric, "tuning trace has no finite score");
  return entries[static_cast<size_t>(i)].point;
}

double TuneTrace::best_score() const {
  const int64_t i = best_index();
  require(i >= 0, ErrCode::numeric, "tuning trace has no finite score");
  return entries[static_cast<size_t>(i)].score;
}

GpPosterior gp_posterior(const std::vector<std::array<double, 2>>& points,
                         const std::vector<double>& scores,
                         const std::vector<std::array<double, 2>>& queries, double noise) {
  const int64_t n = static_cast<int64_t>(points.size());
  require(n >= 1, ErrCode::invalid_argument, "GP needs at least one observation");
  require(scores.size() == points.size(), ErrCode::invalid_argument,
          "GP points/scores length mismatch");
  require(noise > 0.0, ErrCode::invalid_argument, "GP noise must be positive");

  double mean_y = 0.0;
  for (double s : scores) mean_y += s;
  mean_y /= static_cast<double>(n);
  double var_y = 0.0;
  for (double s : scores) var_y += (s - mean_y) * (s - mean_y);
  var_y = n > 1 ? var_y / static_cast<double>(n - 1) : 0.0;
  const double sigma_sq = var_y > 0.0 ? var_y : 1.0;

  // Escalate the diagonal jitter until the kernel factors, then give up.
  std::vector<double> chol;
  double jitter = noise;
  bool ok = false;
  while (jitter <= kMaxJitter) {
    chol.assign(static_cast<size_t>(n * n), 0.0);
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < n; ++j) {
        chol[i * n + j] = rbf(points[static_cast<size_t>(i)], points[static_cast<size_t>(j)],
                              sigma_sq);
      }
      chol[i * n + i] += jitter * sigma_sq;
    }
    if (cholesky(chol, n)) {
      ok = true;
      break;
    }
    jitter *= 10.0;
  }
  require(ok, ErrCode::numeric, "GP kernel matrix not positive definite even at max jitter");

  std::vector<double> alpha(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) alpha[static_cast<size_t>(i)] = scores[static_cast<size_t>(i)] - mean_y;
  cholesky_solve(chol, n, alpha);

  GpPosterior post;
  post.mean.resize(queries.size());
  post.var.resize(queries.size());
  std::vector<double> kstar(static_cast<size_t>(n));
  for (size_t q = 0; q < queries.size(); ++q) {
    for (int64_t i = 0; i < n; ++i) {
      kstar[static_cast<size_t>(i)] = rbf(points[static_cast<size_t>(i)], queries[q], sigma_sq);
    }
    double mu = mean_y;
    for (int64_t i = 0; i < n; ++i) mu += kstar[static_cast<size_t>(i)] * alpha[static_cast<size_t>(i)];
    std::vector<double> v = kstar;
    cholesky_solve(chol, n, v);
    double quad = 0.0;
    for (int64_t i = 0; i < n; ++i) quad += kstar[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
    post.mean[q] = mu;
    post.var[q] = std::max(0.0, sigma_sq - quad);
  }
  return post;
}

double expected_improvement(double mu, double var, double best) {
  const double sigma = std::sqrt(std::max(0.0, var));
  const double gain = mu - best;
  if (sigma < 1e-12) return std::max(0.0, gain);
  const double z = gain / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, gain * cdf + sigma * pdf);
}

TuneTrace bayes_optimize(const std::function<double(TunePoint)>& objective,
                         const SearchSpace& space, int64_t total, int64_t init, uint64_t seed) {
  require(static_cast<bool>(objective), ErrCode::invalid_argument, "tuning objective is empty");
  require(init >= 1 && total >= init, ErrCode::invalid_argument,
          "tuning budget must satisfy total >= init >= 1");
  require(space.w0_hi >= space.w0_lo && space.lambda_hi >= space.lambda_lo,
          ErrCode::invalid_argument, "search ranges must be non-empty");

  Rng rng(seed);
  const auto sample_uniform = [&]() {
    TunePoint p;
    p.w0 = rng.uniform(space.w0_lo, space.w0_hi);
    p.lambda = rng.uniform(space.lambda_lo, space.lambda_hi);
    return p;
  };

  TuneTrace trace;
  std::vector<std::array<double, 2>> fit_points;
  std::vector<double> fit_scores;
  const auto evaluate = [&](TunePoint raw) {
    const TunePoint p = space.round(raw);
    double score = objective(p);
    if (!std::isfinite(score)) {
      score = -std::numeric_limits<double>::infinity();
    } else {
      fit_points.push_back(to_unit(space, p));
      fit_scores.push_back(score);
    }
    trace.entries.push_back({p, score});
  };

  for (int64_t i = 0; i < init; ++i) evaluate(sample_uniform());

  for (int64_t round = init; round < total; ++round) {
    // Candidates are drawn every round even when the GP fit is empty so the
    // random stream (and hence the trace) stays deterministic.
    std::vector<TunePoint> cand(static_cast<size_t>(kCandidates));
    std::vector<std::array<double, 2>> cand_unit(cand.size());
    for (size_t i = 0; i < cand.size(); ++i) {
      cand[i] = sample_uniform();
      cand_unit[i] = to_unit(space, cand[i]);
    }
    if (fit_points.empty()) {
      evaluate(cand[0]);
      continue;
    }
    const GpPosterior post = gp_posterior(fit_points, fit_scores, cand_unit);
    const double best = *std::max_element(fit_scores.begin(), fit_scores.end());
    size_t pick = 0;
    double pick_ei = -1.0;
    for (size_t i = 0; i < cand.size(); ++i) {
      const double ei = expected_improvement(post.mean[i], post.var[i], best);
      if (ei > pick_ei) {
        pick_ei = ei;
        pick = i;
      }
    }
    evaluate(cand[pick]);
  }
  return trace;
}

}  // namespace sirec
