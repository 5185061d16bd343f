#pragma once

#include <vector>

#include "core/tape.hpp"
#include "core/types.hpp"

namespace sirec {

/// Predicted multi-coil k-space recorded on a tape (one split-complex pair
/// per coil, standard frequency layout).
struct KspaceGraph {
  std::vector<ad::ComplexRef> coils;
};

/// Record the acquisition operator per coil: M * F(C_j * I) with the unitary
/// FFT; entries outside kept lines are exactly zero.  Differentiable w.r.t.
/// whatever image/sensitivity leaves feed it.
template <typename T>
KspaceGraph forward_model(ad::Tape<T>& tape, const ad::ComplexRef& image,
                          const std::vector<ad::ComplexRef>& sens, const SamplingMask& mask);

/// Tape-free counterparts used by data generation, baselines and inference.
ComplexImage fft2_plain(const ComplexImage& img);
ComplexImage ifft2_plain(const ComplexImage& img);

/// M * F(C_j * I) for every coil, as data (not graph nodes).
KSpaceVolume forward_model_plain(const ComplexImage& image, const SensitivityField& sens,
                                 const SamplingMask& mask);

/// Adjoint of the acquisition operator: sum_j conj(C_j) * IFFT(M * S_j).
/// This is the zero-filled baseline when applied to measured data.
ComplexImage adjoint_model(const KSpaceVolume& kspace, const SensitivityField& sens);

/// Zero all entries outside the volume's kept lines (idempotent projection).
void apply_mask(KSpaceVolume& volume);

/// Inference-time data consistency: measured values replace predictions on
/// every kept line, bit-exactly; unsampled lines keep the prediction.
KSpaceVolume kspace_consistency(const KSpaceVolume& predicted, const KSpaceVolume& measured);

}  // namespace sirec
