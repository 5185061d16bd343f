#pragma once

#include <cstdint>
#include <string>

#include "core/inr.hpp"

namespace sirec {

enum class Precision { single, dbl };

/// Every tunable of a reconstruction run.  Defaults follow the reference
/// protocol: 6 hidden layers of 256, polynomial order 15, 1500 iterations,
/// SIREN rate 1e-4 decaying 0.8x every 500 iterations, polynomial rate 0.1
/// decaying 0.5x, and the knee-protocol hyperparameters w0=31, lambda=3.8.
struct ReconConfig {
  double w0 = 31.0;
  double lambda = 3.8;
  int64_t iters = 1500;
  double lr_inr = 1e-4;
  double lr_inr_decay = 0.8;
  double lr_poly = 0.1;
  double lr_poly_decay = 0.5;
  int64_t decay_every = 500;
  int64_t poly_order = 15;
  int64_t hidden_layers = 6;
  int64_t hidden_width = 256;
  Activation activation = Activation::sine;
  bool use_pe = false;
  int64_t pe_bands = 6;
  bool use_tv = true;
  bool use_kc = true;
  uint64_t seed_inr = 101;
  uint64_t seed_poly = 202;
  Precision precision = Precision::single;
};

/// Throws ErrCode::invalid_argument naming the offending field.  A learning
/// rate of exactly zero is allowed and freezes that parameter group (used by
/// the optimizer-isolation checks).
void validate(const ReconConfig& cfg);

/// JSON round trip.  Loading rejects unknown keys (typo safety) and missing
/// keys fall back to defaults; all values are validated.
ReconConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ReconConfig& cfg);
ReconConfig load_config(const std::string& path);
void save_config(const ReconConfig& cfg, const std::string& path);

/// Ablation presets: full | no-tv | no-kc | relu | relu-pe.
void apply_variant(ReconConfig& cfg, const std::string& variant);

}  // namespace sirec
