#pragma once

#include <vector>

#include "core/config.hpp"
#include "core/trainer.hpp"
#include "core/types.hpp"

namespace sirec {

/// Everything the inference pipeline produces for one reconstruction.
struct ReconResult {
  ComplexImage combined;                  // adaptive coil combination
  std::vector<ComplexImage> coil_images;  // inverse FFT per coil
  SensitivityField sens;                  // evaluated trained maps (raw scale)
  KSpaceVolume composite;                 // prediction after optional replacement
  ComplexImage network_image;             // pure network output on the grid
};

/// Post-training pipeline: predict full (unmasked) k-space from the trained
/// image and sensitivities, replace predicted values with measured ones on
/// kept lines when cfg.use_kc is set, inverse-transform per coil and combine.
/// Runs entirely in double precision.
ReconResult reconstruct(const TrainedModel& model, const KSpaceVolume& measured,
                        const ReconConfig& cfg);

/// Adaptive (Walsh-style) combination: per pixel, the dominant eigenvector of
/// the 5x5-window coil covariance (10 power iterations, first-basis-vector
/// start, phase fixed so the first nonzero component is real-positive) is
/// applied to the coil vector.  All-zero windows combine to zero.
ComplexImage coil_combine(const std::vector<ComplexImage>& coils);

/// Evaluate a trained network on a scale-times-denser grid spanning the same
/// [-1,1] box (no k-space consistency — pure network output).
ComplexImage query_upsampled(const InrParameters& params, int64_t scale, int64_t d1, int64_t d2);

}  // namespace sirec
