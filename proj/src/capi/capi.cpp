#include "sirec/sirec.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <exception>
#include <numbers>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/hypertune.hpp"
#include "core/inference.hpp"
#include "core/io.hpp"
#include "core/metrics.hpp"
#include "core/mrop.hpp"
#include "core/synthdata.hpp"
#include "core/trainer.hpp"
#include "core/types.hpp"

#include <json.hpp>

/* Handle definitions: each wraps one core value. */
struct sirec_config {
  sirec::ReconConfig cfg;
};
struct sirec_phantom_spec {
  sirec::PhantomSpec spec;
};
struct sirec_image {
  sirec::ComplexImage img;
};
struct sirec_sens {
  sirec::SensitivityField field;
};
struct sirec_mask {
  sirec::SamplingMask mask;
};
struct sirec_kspace {
  sirec::KSpaceVolume vol;
};
struct sirec_model {
  sirec::TrainedModel tm;
  int64_t d1 = 0;
  int64_t d2 = 0;
};
struct sirec_result {
  sirec::ReconResult res;
};
struct sirec_trace {
  sirec::TuneTrace trace;
};

namespace {

thread_local std::string g_last_error;

sirec_status to_status(sirec::ErrCode code) {
  switch (code) {
    case sirec::ErrCode::invalid_argument:
      return SIREC_ERR_INVALID_ARGUMENT;
    case sirec::ErrCode::io:
      return SIREC_ERR_IO;
    case sirec::ErrCode::numeric:
      return SIREC_ERR_NUMERIC;
    case sirec::ErrCode::internal:
      return SIREC_ERR_INTERNAL;
  }
  return SIREC_ERR_INTERNAL;
}

/* Runs `fn`, translating exceptions into status codes + thread-local text. */
template <typename Fn>
sirec_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SIREC_OK;
  } catch (const sirec::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SIREC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SIREC_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  sirec::require(p != nullptr, sirec::ErrCode::invalid_argument,
                 std::string(what) + " must not be NULL");
}

sirec::Tensor<double> magnitude_of(const sirec::ComplexImage& img) {
  sirec::Tensor<double> out({img.d1, img.d2});
  for (size_t i = 0; i < img.v.size(); ++i) out.vec()[i] = std::abs(img.v[i]);
  return out;
}

sirec::Tensor<double> phase_of(const sirec::ComplexImage& img) {
  sirec::Tensor<double> out({img.d1, img.d2});
  for (size_t i = 0; i < img.v.size(); ++i) out.vec()[i] = std::arg(img.v[i]);
  return out;
}

std::vector<double> interleave(const std::vector<std::complex<double>>& v) {
  std::vector<double> out(v.size() * 2);
  for (size_t i = 0; i < v.size(); ++i) {
    out[2 * i] = v[i].real();
    out[2 * i + 1] = v[i].imag();
  }
  return out;
}

sirec::Tensor<double> magnitude_from_file(const std::string& path, int64_t d1, int64_t d2) {
  const std::vector<float> raw = sirec::read_raw_f32(path);
  sirec::require(static_cast<int64_t>(raw.size()) == d1 * d2, sirec::ErrCode::invalid_argument,
                 path + ": expected " + std::to_string(d1 * d2) + " float32 samples, found " +
                     std::to_string(raw.size()));
  sirec::Tensor<double> out({d1, d2});
  for (size_t i = 0; i < raw.size(); ++i) out.vec()[i] = static_cast<double>(raw[i]);
  return out;
}

}  // namespace

extern "C" {

const char* sirec_version(void) { return "0.1.0"; }

const char* sirec_last_error(void) { return g_last_error.c_str(); }

void sirec_string_free(char* s) { std::free(s); }

/* ---- configuration ------------------------------------------------------ */

sirec_status sirec_config_create(sirec_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sirec_config{};
  });
}

sirec_status sirec_config_load(const char* path, sirec_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new sirec_config{sirec::load_config(path)};
  });
}

sirec_status sirec_config_from_json(const char* json_text, sirec_config** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new sirec_config{sirec::config_from_json_text(json_text)};
  });
}

sirec_status sirec_config_update_json(sirec_config* cfg, const char* json_text) {
  return guarded([&] {
    need(cfg, "cfg");
    need(json_text, "json_text");
    /* Merge: serialize current values, overlay the provided keys, reparse so
     * unknown keys and bad values are rejected by the one true parser. */
    nlohmann::json merged = nlohmann::json::parse(sirec::config_to_json_text(cfg->cfg));
    nlohmann::json patch;
    try {
      patch = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      sirec::fail(sirec::ErrCode::invalid_argument,
                  std::string("config update is not valid JSON: ") + e.what());
    }
    sirec::require(patch.is_object(), sirec::ErrCode::invalid_argument,
                   "config update must be a JSON object");
    for (const auto& item : patch.items()) merged[item.key()] = item.value();
    cfg->cfg = sirec::config_from_json_text(merged.dump());
  });
}

sirec_status sirec_config_set_variant(sirec_config* cfg, const char* variant) {
  return guarded([&] {
    need(cfg, "cfg");
    need(variant, "variant");
    sirec::apply_variant(cfg->cfg, variant);
  });
}

sirec_status sirec_config_save(const sirec_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "cfg");
    need(path, "path");
    sirec::save_config(cfg->cfg, path);
  });
}

sirec_status sirec_config_to_json(const sirec_config* cfg, char** out_json) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out_json, "out_json");
    const std::string text = sirec::config_to_json_text(cfg->cfg);
    char* copy = static_cast<char*>(std::malloc(text.size() + 1));
    sirec::require(copy != nullptr, sirec::ErrCode::internal, "out of memory");
    std::memcpy(copy, text.c_str(), text.size() + 1);
    *out_json = copy;
  });
}

void sirec_config_free(sirec_config* cfg) { delete cfg; }

/* ---- synthetic data ------------------------------------------------------ */

sirec_status sirec_phantom_spec_default(sirec_phantom_spec** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sirec_phantom_spec{};
  });
}

sirec_status sirec_phantom_spec_parse(const char* json_text, sirec_phantom_spec** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new sirec_phantom_spec{sirec::phantom_spec_from_json_text(json_text)};
  });
}

sirec_status sirec_phantom_spec_info(const sirec_phantom_spec* spec, int64_t* d1, int64_t* d2,
                                     int64_t* coils, uint64_t* seed, double* noise_std,
                                     int64_t* mask_d_pe, int64_t* mask_r, int64_t* mask_acs) {
  return guarded([&] {
    need(spec, "spec");
    if (d1) *d1 = spec->spec.d1;
    if (d2) *d2 = spec->spec.d2;
    if (coils) *coils = spec->spec.coils;
    if (seed) *seed = spec->spec.seed;
    if (noise_std) *noise_std = spec->spec.noise_std;
    if (mask_d_pe) *mask_d_pe = spec->spec.mask.d_pe > 0 ? spec->spec.mask.d_pe : spec->spec.d2;
    if (mask_r) *mask_r = spec->spec.mask.r;
    if (mask_acs) *mask_acs = spec->spec.mask.acs;
  });
}

void sirec_phantom_spec_free(sirec_phantom_spec* spec) { delete spec; }

sirec_status sirec_phantom_image(const sirec_phantom_spec* spec, sirec_image** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new sirec_image{sirec::make_phantom(spec->spec)};
  });
}

sirec_status sirec_simulate_coils(int64_t coils, int64_t d1, int64_t d2, uint64_t seed,
                                  sirec_sens** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sirec_sens{sirec::simulate_coils(coils, d1, d2, seed)};
  });
}

sirec_status sirec_make_mask(int64_t d_pe, int64_t r, int64_t acs, int64_t d1, sirec_mask** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sirec_mask{sirec::make_mask({d_pe, r, acs}, d1)};
  });
}

sirec_status sirec_full_mask(int64_t d1, int64_t d2, sirec_mask** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sirec_mask{sirec::make_mask({d2, 1, 0}, d1)};
  });
}

sirec_status sirec_mask_rate(const sirec_mask* mask, double* out_rate) {
  return guarded([&] {
    need(mask, "mask");
    need(out_rate, "out_rate");
    *out_rate = sirec::undersampling_rate(mask->mask);
  });
}

sirec_status sirec_mask_kept(const sirec_mask* mask, int64_t* lines, int64_t buf_len,
                             int64_t* out_count) {
  return guarded([&] {
    need(mask, "mask");
    need(out_count, "out_count");
    const auto& kept = mask->mask.kept_centered;
    *out_count = static_cast<int64_t>(kept.size());
    if (lines) {
      const int64_t n = std::min<int64_t>(buf_len, static_cast<int64_t>(kept.size()));
      std::copy_n(kept.begin(), n, lines);
    }
  });
}

void sirec_mask_free(sirec_mask* mask) { delete mask; }

sirec_status sirec_acquire(const sirec_image* truth, const sirec_sens* coils,
                           const sirec_mask* mask, double noise_std, uint64_t seed,
                           sirec_kspace** out) {
  return guarded([&] {
    need(truth, "truth");
    need(coils, "coils");
    need(mask, "mask");
    need(out, "out");
    *out = new sirec_kspace{
        sirec::acquire(truth->img, coils->field, mask->mask, noise_std, seed)};
  });
}

/* ---- images, sensitivities, k-space -------------------------------------- */

sirec_status sirec_image_dims(const sirec_image* image, int64_t* d1, int64_t* d2) {
  return guarded([&] {
    need(image, "image");
    if (d1) *d1 = image->img.d1;
    if (d2) *d2 = image->img.d2;
  });
}

sirec_status sirec_image_data(const sirec_image* image, double* interleaved, int64_t len) {
  return guarded([&] {
    need(image, "image");
    need(interleaved, "interleaved");
    const int64_t want = 2 * image->img.d1 * image->img.d2;
    sirec::require(len == want, sirec::ErrCode::invalid_argument,
                   "buffer length " + std::to_string(len) + " != " + std::to_string(want));
    for (size_t i = 0; i < image->img.v.size(); ++i) {
      interleaved[2 * i] = image->img.v[i].real();
      interleaved[2 * i + 1] = image->img.v[i].imag();
    }
  });
}

sirec_status sirec_image_write(const sirec_image* image, const char* path, sirec_image_part part,
                               sirec_image_format format) {
  return guarded([&] {
    need(image, "image");
    need(path, "path");
    const sirec::ComplexImage& img = image->img;
    if (format == SIREC_FORMAT_RAW_F32) {
      if (part == SIREC_PART_COMPLEX) {
        sirec::write_raw_f32(path, interleave(img.v));
      } else if (part == SIREC_PART_MAGNITUDE) {
        sirec::write_raw_f32(path, magnitude_of(img).vec());
      } else if (part == SIREC_PART_PHASE) {
        sirec::write_raw_f32(path, phase_of(img).vec());
      } else {
        sirec::fail(sirec::ErrCode::invalid_argument, "unknown image part");
      }
      return;
    }
    sirec::require(format == SIREC_FORMAT_PGM16, sirec::ErrCode::invalid_argument,
                   "unknown image format");
    if (part == SIREC_PART_MAGNITUDE) {
      const sirec::Tensor<double> mag = magnitude_of(img);
      double hi = 0.0;
      for (double v : mag.vec()) hi = std::max(hi, v);
      if (hi <= 0.0) hi = 1.0;
      sirec::write_pgm16(path, mag, 0.0, hi);
    } else if (part == SIREC_PART_PHASE) {
      sirec::write_pgm16(path, phase_of(img), -std::numbers::pi, std::numbers::pi);
    } else {
      sirec::fail(sirec::ErrCode::invalid_argument,
                  "complex images cannot be written as PGM; pick magnitude or phase");
    }
  });
}

void sirec_image_free(sirec_image* image) { delete image; }

sirec_status sirec_sens_dims(const sirec_sens* sens, int64_t* coils, int64_t* d1, int64_t* d2) {
  return guarded([&] {
    need(sens, "sens");
    if (coils) *coils = sens->field.coils;
    if (d1) *d1 = sens->field.d1;
    if (d2) *d2 = sens->field.d2;
  });
}

sirec_status sirec_sens_write_raw(const sirec_sens* sens, const char* path) {
  return guarded([&] {
    need(sens, "sens");
    need(path, "path");
    sirec::write_raw_f32(path, interleave(sens->field.v));
  });
}

void sirec_sens_free(sirec_sens* sens) { delete sens; }

sirec_status sirec_kspace_read(const char* path, sirec_kspace** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new sirec_kspace{sirec::read_kspc(path)};
  });
}

sirec_status sirec_kspace_write(const sirec_kspace* kspace, const char* path) {
  return guarded([&] {
    need(kspace, "kspace");
    need(path, "path");
    sirec::write_kspc(path, kspace->vol);
  });
}

sirec_status sirec_kspace_dims(const sirec_kspace* kspace, int64_t* coils, int64_t* d1,
                               int64_t* d2) {
  return guarded([&] {
    need(kspace, "kspace");
    if (coils) *coils = kspace->vol.coils;
    if (d1) *d1 = kspace->vol.d1;
    if (d2) *d2 = kspace->vol.d2;
  });
}

sirec_status sirec_kspace_mask(const sirec_kspace* kspace, sirec_mask** out) {
  return guarded([&] {
    need(kspace, "kspace");
    need(out, "out");
    *out = new sirec_mask{kspace->vol.mask};
  });
}

sirec_status sirec_kspace_data(const sirec_kspace* kspace, double* interleaved, int64_t len) {
  return guarded([&] {
    need(kspace, "kspace");
    need(interleaved, "interleaved");
    const int64_t want = 2 * kspace->vol.coils * kspace->vol.d1 * kspace->vol.d2;
    sirec::require(len == want, sirec::ErrCode::invalid_argument,
                   "buffer length " + std::to_string(len) + " != " + std::to_string(want));
    for (size_t i = 0; i < kspace->vol.v.size(); ++i) {
      interleaved[2 * i] = kspace->vol.v[i].real();
      interleaved[2 * i + 1] = kspace->vol.v[i].imag();
    }
  });
}

void sirec_kspace_free(sirec_kspace* kspace) { delete kspace; }

/* ---- reconstruction ------------------------------------------------------ */

sirec_status sirec_reconstruct(const sirec_kspace* measured, const sirec_config* cfg,
                               const char* abort_checkpoint_path, sirec_model** out_model,
                               sirec_result** out_result) {
  return guarded([&] {
    need(measured, "measured");
    need(cfg, "cfg");
    sirec::TrainedModel tm;
    try {
      tm = sirec::train(measured->vol, cfg->cfg);
    } catch (const sirec::TrainAbort& abort) {
      std::string msg = abort.what();
      if (abort_checkpoint_path != nullptr && abort.last_good() != nullptr) {
        sirec::write_checkpoint(abort_checkpoint_path,
                                {abort.last_good()->inr, abort.last_good()->poly,
                                 measured->vol.d1, measured->vol.d2});
        msg += "; last finite parameters saved to ";
        msg += abort_checkpoint_path;
      }
      sirec::fail(sirec::ErrCode::numeric, msg);
    }
    sirec::ReconResult res = sirec::reconstruct(tm, measured->vol, cfg->cfg);
    if (out_model) {
      *out_model = new sirec_model{std::move(tm), measured->vol.d1, measured->vol.d2};
    }
    if (out_result) *out_result = new sirec_result{std::move(res)};
  });
}

sirec_status sirec_model_save(const sirec_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    sirec::write_checkpoint(path, {model->tm.inr, model->tm.poly, model->d1, model->d2});
  });
}

sirec_status sirec_model_load(const char* path, sirec_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    sirec::Checkpoint ckpt = sirec::read_checkpoint(path);
    auto* model = new sirec_model{};
    model->tm.inr = std::move(ckpt.inr);
    model->tm.poly = std::move(ckpt.poly);
    model->d1 = ckpt.d1;
    model->d2 = ckpt.d2;
    *out = model;
  });
}

sirec_status sirec_model_info(const sirec_model* model, int64_t* d1, int64_t* d2, int64_t* coils,
                              int64_t* history_len) {
  return guarded([&] {
    need(model, "model");
    if (d1) *d1 = model->d1;
    if (d2) *d2 = model->d2;
    if (coils) *coils = model->tm.poly.coils;
    if (history_len) *history_len = static_cast<int64_t>(model->tm.history.rows.size());
  });
}

sirec_status sirec_model_history_csv(const sirec_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    sirec::write_history_csv(path, model->tm.history);
  });
}

sirec_status sirec_model_query(const sirec_model* model, int64_t scale, sirec_image** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = new sirec_image{sirec::query_upsampled(model->tm.inr, scale, model->d1, model->d2)};
  });
}

void sirec_model_free(sirec_model* model) { delete model; }

sirec_status sirec_result_combined(const sirec_result* result, sirec_image** out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    *out = new sirec_image{result->res.combined};
  });
}

sirec_status sirec_result_network_image(const sirec_result* result, sirec_image** out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    *out = new sirec_image{result->res.network_image};
  });
}

sirec_status sirec_result_composite(const sirec_result* result, sirec_kspace** out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    *out = new sirec_kspace{result->res.composite};
  });
}

sirec_status sirec_result_sens(const sirec_result* result, sirec_sens** out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    *out = new sirec_sens{result->res.sens};
  });
}

void sirec_result_free(sirec_result* result) { delete result; }

/* ---- evaluation ---------------------------------------------------------- */

sirec_status sirec_metrics_eval(const double* ref, const double* test, int64_t d1, int64_t d2,
                                double* out_psnr_db, double* out_ssim) {
  return guarded([&] {
    need(ref, "ref");
    need(test, "test");
    sirec::Tensor<double> rt({d1, d2});
    sirec::Tensor<double> tt({d1, d2});
    std::copy_n(ref, rt.vec().size(), rt.vec().begin());
    std::copy_n(test, tt.vec().size(), tt.vec().begin());
    const double p = sirec::psnr(rt, tt);
    const double s = sirec::ssim(rt, tt);
    if (out_psnr_db) *out_psnr_db = p;
    if (out_ssim) *out_ssim = s;
  });
}

sirec_status sirec_eval_files(const char* ref_path, const char* test_path, int64_t d1, int64_t d2,
                              double* out_psnr_db, double* out_ssim) {
  return guarded([&] {
    need(ref_path, "ref_path");
    need(test_path, "test_path");
    const sirec::Tensor<double> ref = magnitude_from_file(ref_path, d1, d2);
    const sirec::Tensor<double> test = magnitude_from_file(test_path, d1, d2);
    const double p = sirec::psnr(ref, test);
    const double s = sirec::ssim(ref, test);
    if (out_psnr_db) *out_psnr_db = p;
    if (out_ssim) *out_ssim = s;
  });
}

/* ---- hyperparameter search ----------------------------------------------- */

sirec_status sirec_tune(const char* const* kspc_paths, const char* const* truth_mag_paths,
                        int64_t n_cases, const sirec_config* base, double w0_lo, double w0_hi,
                        double lambda_lo, double lambda_hi, int64_t total, int64_t init,
                        uint64_t seed, sirec_trace** out_trace, sirec_config** out_best) {
  return guarded([&] {
    need(kspc_paths, "kspc_paths");
    need(truth_mag_paths, "truth_mag_paths");
    need(base, "base");
    sirec::require(n_cases >= 1, sirec::ErrCode::invalid_argument,
                   "tuning needs at least one case");

    std::vector<sirec::KSpaceVolume> cases;
    std::vector<sirec::Tensor<double>> truths;
    cases.reserve(static_cast<size_t>(n_cases));
    truths.reserve(static_cast<size_t>(n_cases));
    for (int64_t i = 0; i < n_cases; ++i) {
      need(kspc_paths[i], "kspc path");
      need(truth_mag_paths[i], "truth path");
      cases.push_back(sirec::read_kspc(kspc_paths[i]));
      truths.push_back(magnitude_from_file(truth_mag_paths[i], cases.back().d1, cases.back().d2));
    }

    const auto objective = [&](sirec::TunePoint p) -> double {
      sirec::ReconConfig cfg = base->cfg;
      cfg.w0 = p.w0;
      cfg.lambda = p.lambda;
      double total_psnr = 0.0;
      for (int64_t i = 0; i < n_cases; ++i) {
        try {
          const sirec::TrainedModel tm = sirec::train(cases[static_cast<size_t>(i)], cfg);
          const sirec::ReconResult res =
              sirec::reconstruct(tm, cases[static_cast<size_t>(i)], cfg);
          total_psnr +=
              sirec::psnr(truths[static_cast<size_t>(i)], magnitude_of(res.combined));
        } catch (const sirec::TrainAbort&) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      }
      return total_psnr / static_cast<double>(n_cases);
    };

    sirec::SearchSpace space;
    space.w0_lo = w0_lo;
    space.w0_hi = w0_hi;
    space.lambda_lo = lambda_lo;
    space.lambda_hi = lambda_hi;
    sirec::TuneTrace trace = sirec::bayes_optimize(objective, space, total, init, seed);

    if (out_best) {
      const sirec::TunePoint best = trace.best_point();
      auto* best_cfg = new sirec_config{base->cfg};
      best_cfg->cfg.w0 = best.w0;
      best_cfg->cfg.lambda = best.lambda;
      *out_best = best_cfg;
    }
    if (out_trace) *out_trace = new sirec_trace{std::move(trace)};
  });
}

sirec_status sirec_trace_len(const sirec_trace* trace, int64_t* out_len) {
  return guarded([&] {
    need(trace, "trace");
    need(out_len, "out_len");
    *out_len = static_cast<int64_t>(trace->trace.entries.size());
  });
}

sirec_status sirec_trace_entry(const sirec_trace* trace, int64_t index, double* out_w0,
                               double* out_lambda, double* out_score) {
  return guarded([&] {
    need(trace, "trace");
    sirec::require(index >= 0 && index < static_cast<int64_t>(trace->trace.entries.size()),
                   sirec::ErrCode::invalid_argument, "trace index out of range");
    const auto& e = trace->trace.entries[static_cast<size_t>(index)];
    if (out_w0) *out_w0 = e.point.w0;
    if (out_lambda) *out_lambda = e.point.lambda;
    if (out_score) *out_score = e.score;
  });
}

sirec_status sirec_trace_best(const sirec_trace* trace, double* out_w0, double* out_lambda,
                              double* out_score) {
  return guarded([&] {
    need(trace, "trace");
    const sirec::TunePoint p = trace->trace.best_point();
    if (out_w0) *out_w0 = p.w0;
    if (out_lambda) *out_lambda = p.lambda;
    if (out_score) *out_score = trace->trace.best_score();
  });
}

sirec_status sirec_trace_write_csv(const sirec_trace* trace, const char* path) {
  return guarded([&] {
    need(trace, "trace");
    need(path, "path");
    sirec::write_trace_csv(path, trace->trace);
  });
}

void sirec_trace_free(sirec_trace* trace) { delete trace; }

} /* extern "C" */
