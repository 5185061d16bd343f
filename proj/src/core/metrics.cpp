#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "core/errors.hpp"

namespace sirec {

namespace {

void check_pair(const Tensor<double>& ref, const Tensor<double>& test) {
  require(ref.shape().size() == 2, ErrCode::invalid_argument,
          "metrics expect 2-D magnitude images, got shape " + shape_str(ref.shape()));
  require(ref.shape() == test.shape(), ErrCode::invalid_argument,
          "metric image shapes disagree: " + shape_str(ref.shape()) + " vs " +
              shape_str(test.shape()));
}

std::vector<double> gaussian_window(int64_t size, double sigma) {
  std::vector<double> w(static_cast<size_t>(size * size));
  const double half = static_cast<double>(size - 1) / 2.0;
  double total = 0.0;
  for (int64_t i = 0; i < size; ++i) {
    for (int64_t j = 0; j < size; ++j) {
      const double di = static_cast<double>(i) - half;
      const double dj = static_cast<double>(j) - half;
      const double v = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      w[static_cast<size_t>(i * size + j)] = v;
      total += v;
    }
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

double psnr(const Tensor<double>& ref, const Tensor<double>& test) {
  check_pair(ref, test);
  double peak = 0.0;
  bool any_nonzero = false;
  for (double v : ref.vec()) {
    peak = std::max(peak, v);
    if (v != 0.0) any_nonzero = true;
  }
  require(any_nonzero, ErrCode::invalid_argument, "PSNR reference is identically zero");

  double sq_sum = 0.0;
  for (size_t i = 0; i < ref.vec().size(); ++i) {
    const double d = ref.vec()[i] - test.vec()[i];
    sq_sum += d * d;
  }
  const double mse = sq_sum / static_cast<double>(ref.vec().size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

double ssim(const Tensor<double>& ref, const Tensor<double>& test,
            std::optional<double> data_range) {
  check_pair(ref, test);
  constexpr int64_t kWin = 11;
  constexpr double kSigma = 1.5;
  const int64_t d1 = ref.shape()[0], d2 = ref.shape()[1];
  require(d1 >= kWin && d2 >= kWin, ErrCode::invalid_argument,
          "SSIM needs both dimensions >= 11, got " + shape_str(ref.shape()));

  double range = 0.0;
  if (data_range.has_value()) {
    range = *data_range;
  } else {
    for (double v : ref.vec()) range = std::max(range, v);
  }
  require(range > 0.0, ErrCode::invalid_argument, "SSIM data range must be positive");

  static const std::vector<double> window = gaussian_window(kWin, kSigma);
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  double total = 0.0;
  int64_t count = 0;
  for (int64_t i = 0; i + kWin <= d1; ++i) {
    for (int64_t j = 0; j + kWin <= d2; ++j) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int64_t wi = 0; wi < kWin; ++wi) {
        const double* rrow = ref.vec().data() + (i + wi) * d2 + j;
        const double* trow = test.vec().data() + (i + wi) * d2 + j;
        const double* wrow = window.data() + wi * kWin;
        for (int64_t wj = 0; wj < kWin; ++wj) {
          const double w = wrow[wj];
          const double x = rrow[wj], y = trow[wj];
          mx += w * x;
          my += w * y;
          xx += w * (x * x);
          yy += w * (y * y);
          xy += w * (x * y);
        }
      }
      const double vx = xx - mx * mx;
      const double vy = yy - my * my;
      const double cov = xy - mx * my;
      // (mx-my)^2 + 2*mx*my equals mx^2 + my^2 in exact arithmetic.  This
      // grouping (and the symmetric accumulations above) makes numerator and
      // denominator bit-identical for identical inputs even when the compiler
      // contracts multiply-adds, so SSIM(x, x) is exactly 1 and the metric is
      // exactly symmetric under a shared data range.
      const double mdiff = mx - my;
      const double lum_num = 2.0 * (mx * my) + c1;
      const double lum_den = mdiff * mdiff + 2.0 * (mx * my) + c1;
      const double str_num = 2.0 * cov + c2;
      const double str_den = vx + vy + c2;
      total += (lum_num * str_num) / (lum_den * str_den);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

MetricReport evaluate(const Tensor<double>& ref, const Tensor<double>& test) {
  MetricReport report;
  for (double v : ref.vec()) report.params.data_range = std::max(report.params.data_range, v);
  report.psnr_db = psnr(ref, test);
  report.ssim = ssim(ref, test);
  return report;
}

}  // namespace sirec
