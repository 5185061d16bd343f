#pragma once

#include <cstdint>
#include <optional>

#include "core/tensor.hpp"

namespace sirec {

/// Constants a metric evaluation actually used, reported alongside the value.
struct MetricParams {
  double data_range = 0.0;
  int64_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  MetricParams params;
};

/// 20*log10(max(ref) / RMSE(ref, test)) on magnitude images of equal shape
/// (d1, d2).  Identical images return +infinity; the CSV writer caps the
/// sentinel at 999 dB.  An identically-zero reference is rejected.
double psnr(const Tensor<double>& ref, const Tensor<double>& test);

/// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5, K1=0.01,
/// K2=0.03), valid-region convolution.  `data_range` defaults to max(ref);
/// pass a shared constant to make the metric symmetric in its arguments.
/// Both dimensions must be at least the window size.
double ssim(const Tensor<double>& ref, const Tensor<double>& test,
            std::optional<double> data_range = std::nullopt);

/// Both metrics at once, with the parameters that were used.
MetricReport evaluate(const Tensor<double>& ref, const Tensor<double>& test);

}  // namespace sirec
