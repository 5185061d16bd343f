/* sirec: scan-specific parallel-MRI reconstruction engine.
 *
 * C interface over the reconstruction core.  All functions return a
 * sirec_status; on failure, sirec_last_error() describes the problem for the
 * calling thread.  Out-parameters are written only on SIREC_OK.  Every
 * object returned through a handle out-parameter is owned by the caller and
 * released with the matching *_free function (all of which accept NULL).
 */
#ifndef SIREC_H
#define SIREC_H

#include <stdint.h>

#if defined(_WIN32)
#define SIREC_API __declspec(dllexport)
#elif defined(__GNUC__)
#define SIREC_API __attribute__((visibility("default")))
#else
#define SIREC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sirec_status {
  SIREC_OK = 0,
  SIREC_ERR_INVALID_ARGUMENT = 1, /* bad inputs, malformed specs/configs */
  SIREC_ERR_IO = 2,               /* missing/corrupt/unwritable files */
  SIREC_ERR_NUMERIC = 3,          /* non-finite losses, singular systems */
  SIREC_ERR_INTERNAL = 4          /* unexpected failure inside the library */
} sirec_status;

/* Opaque handles. */
typedef struct sirec_config sirec_config;         /* reconstruction settings */
typedef struct sirec_phantom_spec sirec_phantom_spec; /* synthetic-data spec */
typedef struct sirec_image sirec_image;           /* complex 2-D image */
typedef struct sirec_sens sirec_sens;             /* per-coil sensitivity maps */
typedef struct sirec_mask sirec_mask;             /* k-space sampling mask */
typedef struct sirec_kspace sirec_kspace;         /* multi-coil k-space + mask */
typedef struct sirec_model sirec_model;           /* trained parameters */
typedef struct sirec_result sirec_result;         /* reconstruction outputs */
typedef struct sirec_trace sirec_trace;           /* hyperparameter search log */

/* Library version ("major.minor.patch"); static storage, do not free. */
SIREC_API const char* sirec_version(void);

/* Message for the most recent failure on this thread ("" when none).
 * The pointer stays valid until the next sirec_* call on the same thread. */
SIREC_API const char* sirec_last_error(void);

/* Frees strings returned through char** out-parameters. */
SIREC_API void sirec_string_free(char* s);

/* ---- configuration ------------------------------------------------------ */

SIREC_API sirec_status sirec_config_create(sirec_config** out);
SIREC_API sirec_status sirec_config_load(const char* path, sirec_config** out);
SIREC_API sirec_status sirec_config_from_json(const char* json_text, sirec_config** out);
/* Applies the keys present in `json_text` on top of the current values. */
SIREC_API sirec_status sirec_config_update_json(sirec_config* cfg, const char* json_text);
/* Ablation presets: "full" | "no-tv" | "no-kc" | "relu" | "relu-pe". */
SIREC_API sirec_status sirec_config_set_variant(sirec_config* cfg, const char* variant);
SIREC_API sirec_status sirec_config_save(const sirec_config* cfg, const char* path);
SIREC_API sirec_status sirec_config_to_json(const sirec_config* cfg, char** out_json);
SIREC_API void sirec_config_free(sirec_config* cfg);

/* ---- synthetic data ------------------------------------------------------ */

SIREC_API sirec_status sirec_phantom_spec_default(sirec_phantom_spec** out);
SIREC_API sirec_status sirec_phantom_spec_parse(const char* json_text, sirec_phantom_spec** out);
/* Any out-pointer may be NULL. */
SIREC_API sirec_status sirec_phantom_spec_info(const sirec_phantom_spec* spec, int64_t* d1,
                                               int64_t* d2, int64_t* coils, uint64_t* seed,
                                               double* noise_std, int64_t* mask_d_pe,
                                               int64_t* mask_r, int64_t* mask_acs);
SIREC_API void sirec_phantom_spec_free(sirec_phantom_spec* spec);

/* Ground-truth complex image from the spec's ellipse and phase model. */
SIREC_API sirec_status sirec_phantom_image(const sirec_phantom_spec* spec, sirec_image** out);

/* Smooth simulated coil maps (deterministic in seed). */
SIREC_API sirec_status sirec_simulate_coils(int64_t coils, int64_t d1, int64_t d2, uint64_t seed,
                                            sirec_sens** out);

/* Every R-th phase-encode line plus a centered ACS block, centered indexing. */
SIREC_API sirec_status sirec_make_mask(int64_t d_pe, int64_t r, int64_t acs, int64_t d1,
                                       sirec_mask** out);
SIREC_API sirec_status sirec_full_mask(int64_t d1, int64_t d2, sirec_mask** out);
SIREC_API sirec_status sirec_mask_rate(const sirec_mask* mask, double* out_rate);
/* Writes up to `buf_len` kept line indices (centered, ascending) and always
 * reports the total count; call with lines=NULL to query the count alone. */
SIREC_API sirec_status sirec_mask_kept(const sirec_mask* mask, int64_t* lines, int64_t buf_len,
                                       int64_t* out_count);
SIREC_API void sirec_mask_free(sirec_mask* mask);

/* Simulated acquisition: mask * (FFT(coil * image) + complex noise). */
SIREC_API sirec_status sirec_acquire(const sirec_image* truth, const sirec_sens* coils,
                                     const sirec_mask* mask, double noise_std, uint64_t seed,
                                     sirec_kspace** out);

/* ---- images, sensitivities, k-space -------------------------------------- */

typedef enum sirec_image_part {
  SIREC_PART_COMPLEX = 0, /* interleaved re, im */
  SIREC_PART_MAGNITUDE = 1,
  SIREC_PART_PHASE = 2
} sirec_image_part;

typedef enum sirec_image_format {
  SIREC_FORMAT_RAW_F32 = 0, /* headerless little-endian float32 */
  SIREC_FORMAT_PGM16 = 1    /* 16-bit binary PGM (magnitude/phase only) */
} sirec_image_format;

SIREC_API sirec_status sirec_image_dims(const sirec_image* image, int64_t* d1, int64_t* d2);
/* Copies row-major interleaved (re, im) doubles; len must be 2*d1*d2. */
SIREC_API sirec_status sirec_image_data(const sirec_image* image, double* interleaved,
                                        int64_t len);
SIREC_API sirec_status sirec_image_write(const sirec_image* image, const char* path,
                                         sirec_image_part part, sirec_image_format format);
SIREC_API void sirec_image_free(sirec_image* image);

SIREC_API sirec_status sirec_sens_dims(const sirec_sens* sens, int64_t* coils, int64_t* d1,
                                       int64_t* d2);
/* Coil-major row-major interleaved float32 file. */
SIREC_API sirec_status sirec_sens_write_raw(const sirec_sens* sens, const char* path);
SIREC_API void sirec_sens_free(sirec_sens* sens);

SIREC_API sirec_status sirec_kspace_read(const char* path, sirec_kspace** out);
SIREC_API sirec_status sirec_kspace_write(const sirec_kspace* kspace, const char* path);
SIREC_API sirec_status sirec_kspace_dims(const sirec_kspace* kspace, int64_t* coils, int64_t* d1,
                                         int64_t* d2);
SIREC_API sirec_status sirec_kspace_mask(const sirec_kspace* kspace, sirec_mask** out);
/* Copies coil-major row-major interleaved doubles; len must be 2*coils*d1*d2. */
SIREC_API sirec_status sirec_kspace_data(const sirec_kspace* kspace, double* interleaved,
                                         int64_t len);
SIREC_API void sirec_kspace_free(sirec_kspace* kspace);

/* ---- reconstruction ------------------------------------------------------ */

/* Jointly fits the coordinate networks and polynomial sensitivities to the
 * measured k-space, then runs inference (k-space consistency + adaptive coil
 * combination).  Either out-parameter may be NULL.  On a non-finite loss the
 * call fails with SIREC_ERR_NUMERIC naming the iteration; if
 * abort_checkpoint_path is non-NULL the last finite parameter set (when one
 * exists) is saved there first. */
SIREC_API sirec_status sirec_reconstruct(const sirec_kspace* measured, const sirec_config* cfg,
                                         const char* abort_checkpoint_path,
                                         sirec_model** out_model, sirec_result** out_result);

SIREC_API sirec_status sirec_model_save(const sirec_model* model, const char* path);
SIREC_API sirec_status sirec_model_load(const char* path, sirec_model** out);
/* history_len is 0 for models loaded from a checkpoint. */
SIREC_API sirec_status sirec_model_info(const sirec_model* model, int64_t* d1, int64_t* d2,
                                        int64_t* coils, int64_t* history_len);
SIREC_API sirec_status sirec_model_history_csv(const sirec_model* model, const char* path);
/* Re-queries the image network on a scale-times denser grid. */
SIREC_API sirec_status sirec_model_query(const sirec_model* model, int64_t scale,
                                         sirec_image** out);
SIREC_API void sirec_model_free(sirec_model* model);

SIREC_API sirec_status sirec_result_combined(const sirec_result* result, sirec_image** out);
SIREC_API sirec_status sirec_result_network_image(const sirec_result* result, sirec_image** out);
SIREC_API sirec_status sirec_result_composite(const sirec_result* result, sirec_kspace** out);
SIREC_API sirec_status sirec_result_sens(const sirec_result* result, sirec_sens** out);
SIREC_API void sirec_result_free(sirec_result* result);

/* ---- evaluation ---------------------------------------------------------- */

/* PSNR (dB; +inf for identical inputs) and SSIM on magnitude images. */
SIREC_API sirec_status sirec_metrics_eval(const double* ref, const double* test, int64_t d1,
                                          int64_t d2, double* out_psnr_db, double* out_ssim);
/* Same, reading two headerless float32 magnitude files of the given shape. */
SIREC_API sirec_status sirec_eval_files(const char* ref_path, const char* test_path, int64_t d1,
                                        int64_t d2, double* out_psnr_db, double* out_ssim);

/* ---- hyperparameter search ----------------------------------------------- */

/* Bayesian search over (w0, lambda): `init` seeded uniform points then
 * expected-improvement picks, `total` evaluations overall, w0 rounded to the
 * nearest integer and lambda to one decimal before each evaluation.  The
 * objective is the mean PSNR of a reconstruction per case (k-space file i
 * scored against magnitude file i of shape d1 x d2 from that k-space).
 * Either out-parameter may be NULL. */
SIREC_API sirec_status sirec_tune(const char* const* kspc_paths,
                                  const char* const* truth_mag_paths, int64_t n_cases,
                                  const sirec_config* base, double w0_lo, double w0_hi,
                                  double lambda_lo, double lambda_hi, int64_t total, int64_t init,
                                  uint64_t seed, sirec_trace** out_trace,
                                  sirec_config** out_best);

SIREC_API sirec_status sirec_trace_len(const sirec_trace* trace, int64_t* out_len);
SIREC_API sirec_status sirec_trace_entry(const sirec_trace* trace, int64_t index, double* out_w0,
                                         double* out_lambda, double* out_score);
SIREC_API sirec_status sirec_trace_best(const sirec_trace* trace, double* out_w0,
                                        double* out_lambda, double* out_score);
SIREC_API sirec_status sirec_trace_write_csv(const sirec_trace* trace, const char* path);
SIREC_API void sirec_trace_free(sirec_trace* trace);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SIREC_H */
