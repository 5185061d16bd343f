#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/coil.hpp"
#include "core/hypertune.hpp"
#include "core/inr.hpp"
#include "core/tensor.hpp"
#include "core/trainer.hpp"
#include "core/types.hpp"

namespace sirec {

/// Multi-coil k-space container ("KSPC"): magic, version u16, coil count u16,
/// d1 u32, d2 u32, kept-line count u32, sorted centered line indices u32 each,
/// then coils*d1*d2 interleaved (re, im) little-endian float32.  Round trips
/// are bit-exact; maps load as float32 values promoted to double.
void write_kspc(const std::string& path, const KSpaceVolume& volume);
KSpaceVolume read_kspc(const std::string& path);

/// Trained-model checkpoint ("IMJW"): network description (activation, w0,
/// positional encoding, per-layer dims) with float64 weights for both
/// branches, plus the polynomial sensitivity coefficients and the grid the
/// model was trained on.
struct Checkpoint {
  InrParameters inr;
  PolyCoefficients poly;
  int64_t d1 = 0;
  int64_t d2 = 0;
};
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples as the format
/// requires).  Values are mapped linearly from [lo, hi] and clamped.
void write_pgm16(const std::string& path, const Tensor<double>& image, double lo, double hi);

/// Headerless little-endian float32 stream (doubles are narrowed on write).
void write_raw_f32(const std::string& path, const std::vector<double>& values);
std::vector<float> read_raw_f32(const std::string& path);

/// Training curve: iteration,L_DC,L_TV,L_tot,lr_inr,lr_poly,seconds.
void write_history_csv(const std::string& path, const TrainHistory& history);

/// Evaluation table: case,R,ACS,variant,psnr_db,ssim,seconds.  Infinite PSNR
/// is written as the 999 dB sentinel cap.
struct MetricRow {
  std::string case_id;
  int64_t r = 0;
  int64_t acs = 0;
  std::string variant;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double seconds = 0.0;
};
void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);

/// Hyperparameter search trace: iter,w0,lambda,score.
void write_trace_csv(const std::string& path, const TuneTrace& trace);

}  // namespace sirec
