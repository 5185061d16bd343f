#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace sirec {

/// One ellipse of the magnitude phantom, in normalized [-1,1] coordinates.
/// Intensities are additive; overlaps accumulate.
struct Ellipse {
  double cx = 0, cy = 0;       // center
  double a = 0, b = 0;         // semi-axes along (x, y) before rotation
  double angle_deg = 0;        // rotation of the x semi-axis
  double intensity = 0;
};

/// A smooth polynomial phase term: coeff * x^p * y^q.
struct PhaseTerm {
  int64_t p = 0, q = 0;
  double coeff = 0;
};

/// Cartesian undersampling prescription: every R-th phase-encode line (in
/// centered indexing, anchored at index 0) plus a centered ACS block.
struct MaskSpec {
  int64_t d_pe = 0;
  int64_t r = 1;
  int64_t acs = 0;
};

/// Synthetic acquisition description (replaces scanner data at desk scale).
struct PhantomSpec {
  int64_t d1 = 64, d2 = 64;
  int64_t coils = 4;
  bool shepp_logan = true;          // use the built-in 10-ellipse head phantom
  std::vector<Ellipse> ellipses;    // custom list when shepp_logan is false
  std::vector<PhaseTerm> phase;     // polynomial phase (wrapped to (-pi, pi])
  double noise_std = 0.0;           // k-space noise std per component
  uint64_t seed = 7;
  MaskSpec mask;                    // d_pe filled from d2 when zero
};

/// JSON parsing for phantom specs; unknown keys and missing required fields
/// are rejected naming the key.
PhantomSpec phantom_spec_from_json_text(const std::string& text);
PhantomSpec load_phantom_spec(const std::string& path);

/// Magnitude from ellipse superposition (clamped to [0,1]) with the smooth
/// polynomial phase applied.  Deterministic; ignores spec.seed.
ComplexImage make_phantom(const PhantomSpec& spec);

/// Smooth complex coil profiles: per coil a Gaussian bump centered at an
/// angle-equispaced point outside the field of view, over a constant floor
/// (so root-sum-of-squares >= 0.1 everywhere), with a gentle linear phase.
SensitivityField simulate_coils(int64_t coils, int64_t d1, int64_t d2, uint64_t seed);

/// Kept lines = {0, R, 2R, ...} in centered indexing, union a centered ACS
/// block [floor(d/2)-floor(ACS/2), +ACS-1].  This construction reproduces the
/// reference undersampling-rate table exactly.
SamplingMask make_mask(const MaskSpec& spec, int64_t d1);

/// Kept-line fraction |kept| / d_pe.
double undersampling_rate(const SamplingMask& mask);

/// Simulated acquisition S_j = M (F(C_j I) + n_j) with i.i.d. complex
/// Gaussian k-space noise (std per component), deterministic in `seed`.
KSpaceVolume acquire(const ComplexImage& truth, const SensitivityField& coils,
                     const SamplingMask& mask, double noise_std, uint64_t seed);

}  // namespace sirec
