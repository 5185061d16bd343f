#include "core/inference.hpp"

#include <cmath>

#include "core/coords.hpp"
#include "core/mrop.hpp"

namespace sirec {
namespace {

constexpr int kWindow = 5;       // covariance window edge (pixels)
constexpr int kPowerIters = 10;  // power-iteration count

Tensor<double> network_inputs(const InrParameters& params, const CoordinateGrid& grid) {
  if (params.use_pe) return positional_encode(grid, params.pe_bands);
  return grid.coords;
}

}  // namespace

ComplexImage coil_combine(const std::vector<ComplexImage>& coils) {
  require(!coils.empty(), ErrCode::invalid_argument, "coil_combine: no coil images");
  const int64_t c = static_cast<int64_t>(coils.size());
  const int64_t d1 = coils[0].d1, d2 = coils[0].d2;
  for (const ComplexImage& img : coils)
    require(img.d1 == d1 && img.d2 == d2, ErrCode::invalid_argument,
            "coil_combine: coil images differ in size");

  ComplexImage out(d1, d2);
  std::vector<std::complex<double>> cov(c * c);
  std::vector<std::complex<double>> u(c), w(c);
  const int half = kWindow / 2;

  for (int64_t i = 0; i < d1; ++i) {
    for (int64_t j = 0; j < d2; ++j) {
      // Windowed coil covariance with replicate-clamped borders.
      std::fill(cov.begin(), cov.end(), std::complex<double>(0.0, 0.0));
      for (int di = -half; di <= half; ++di) {
        const int64_t si = std::clamp<int64_t>(i + di, 0, d1 - 1);
        for (int dj = -half; dj <= half; ++dj) {
          const int64_t sj = std::clamp<int64_t>(j + dj, 0, d2 - 1);
          for (int64_t a = 0; a < c; ++a) {
            const std::complex<double> va = coils[a].at(si, sj);
            for (int64_t b = 0; b < c; ++b)
              cov[a * c + b] += va * std::conj(coils[b].at(si, sj));
          }
        }
      }

      // Dominant eigenvector by power iteration from a deterministic start.
      // If the start vector lies in the null space (e.g. a coil that is zero
      // across the window), advance to the next basis vector.
      std::fill(u.begin(), u.end(), std::complex<double>(0.0, 0.0));
      bool zero_cov = true;
      for (int64_t k = 0; k < c && zero_cov; ++k) {
        for (int64_t a = 0; a < c; ++a) {
          w[a] = cov[a * c + k];
          if (w[a] != 0.0) zero_cov = false;
        }
        if (!zero_cov) u[k] = 1.0;
      }
      if (zero_cov) {
        out.at(i, j) = 0.0;
        continue;
      }
      for (int iter = 0; iter < kPowerIters; ++iter) {
        for (int64_t a = 0; a < c; ++a) {
          std::complex<double> acc = 0.0;
          for (int64_t b = 0; b < c; ++b) acc += cov[a * c + b] * u[b];
          w[a] = acc;
        }
        double nrm = 0.0;
        for (int64_t a = 0; a < c; ++a) nrm += std::norm(w[a]);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) break;  // converged into the null space; keep previous u
        for (int64_t a = 0; a < c; ++a) u[a] = w[a] / nrm;
      }

      // Fix the eigenvector's arbitrary global phase.
      for (int64_t a = 0; a < c; ++a) {
        const double mag = std::abs(u[a]);
        if (mag > 0.0) {
          const std::complex<double> rot = std::conj(u[a]) / mag;
          for (int64_t b = 0; b < c; ++b) u[b] *= rot;
          break;
        }
      }

      std::complex<double> combined = 0.0;
      for (int64_t a = 0; a < c; ++a) combined += std::conj(u[a]) * coils[a].at(i, j);
      out.at(i, j) = combined;
    }
  }
  return out;
}

ReconResult reconstruct(const TrainedModel& model, const KSpaceVolume& measured,
                        const ReconConfig& cfg) {
  require(model.poly.coils == measured.coils, ErrCode::invalid_argument,
          "reconstruct: trained sensitivities cover " + std::to_string(model.poly.coils) +
              " coils but measurement has " + std::to_string(measured.coils));
  const CoordinateGrid grid = make_grid(measured.d1, measured.d2);
  const Tensor<double> inputs = network_inputs(model.inr, grid);
  require(inputs.shape()[1] == model.inr.real_branch[0].w.shape()[1], ErrCode::invalid_argument,
          "reconstruct: network input width does not match trained first layer");

  ReconResult result;
  result.network_image = eval_image_plain(model.inr, inputs, measured.d1, measured.d2);
  result.sens = eval_sensitivities_plain(model.poly, build_basis(grid, model.poly.order),
                                         measured.d1, measured.d2);

  // Full (unmasked) prediction — un-acquired lines carry the model estimate.
  const int64_t pixels = measured.d1 * measured.d2;
  KSpaceVolume predicted(measured.coils, measured.d1, measured.d2);
  predicted.mask = measured.mask;
  ComplexImage weighted(measured.d1, measured.d2);
  for (int64_t j = 0; j < measured.coils; ++j) {
    for (int64_t k = 0; k < pixels; ++k)
      weighted.v[k] = result.sens.v[j * pixels + k] * result.network_image.v[k];
    ComplexImage f = fft2_plain(weighted);
    std::copy(f.v.begin(), f.v.end(), predicted.v.begin() + j * pixels);
  }

  result.composite = cfg.use_kc ? kspace_consistency(predicted, measured) : std::move(predicted);

  result.coil_images.reserve(measured.coils);
  ComplexImage coil_k(measured.d1, measured.d2);
  for (int64_t j = 0; j < measured.coils; ++j) {
    std::copy(result.composite.v.begin() + j * pixels,
              result.composite.v.begin() + (j + 1) * pixels, coil_k.v.begin());
    result.coil_images.push_back(ifft2_plain(coil_k));
  }

  result.combined = coil_combine(result.coil_images);
  return result;
}

ComplexImage query_upsampled(const InrParameters& params, int64_t scale, int64_t d1, int64_t d2) {
  require(scale >= 1, ErrCode::invalid_argument, "query_upsampled: scale must be >= 1");
  const CoordinateGrid grid = make_dense_grid(d1, d2, scale);
  const Tensor<double> inputs = network_inputs(params, grid);
  return eval_image_plain(params, inputs, d1 * scale, d2 * scale);
}

}  // namespace sirec
