// Command-line front end.  Links only the public C API (libsirec); all
// numerical work happens behind that boundary.  Exit codes: 0 success,
// 2 usage/input error, 3 numerical failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <sirec/sirec.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

[[noreturn]] void die(sirec_status status) {
  std::cerr << "error: " << sirec_last_error() << "\n";
  std::exit(status == SIREC_ERR_NUMERIC ? kExitNumeric : kExitUsage);
}

void check(sirec_status status) {
  if (status != SIREC_OK) die(status);
}

[[noreturn]] void usage_error(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(kExitUsage);
}

std::string iso_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Every command leaves a manifest next to its outputs so a run can be
// reproduced from the files alone.
void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& argv, const json& inputs,
                    const json& outputs, const json& seeds, double seconds) {
  json m;
  m["command"] = command;
  m["argv"] = argv;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["seeds"] = seeds;
  m["tool_version"] = sirec_version();
  m["wall_clock_seconds"] = seconds;
  m["timestamp_utc"] = iso_utc_now();
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out.good()) usage_error("cannot write manifest in " + dir.string());
  out << m.dump(2) << "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) usage_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) usage_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_image_products(sirec_image* image, const fs::path& dir, const std::string& stem,
                          std::vector<std::string>& outputs, bool pgm) {
  const std::string cplx = (dir / (stem + ".cplx.f32")).string();
  const std::string mag = (dir / (stem + ".mag.f32")).string();
  const std::string phase = (dir / (stem + ".phase.f32")).string();
  check(sirec_image_write(image, cplx.c_str(), SIREC_PART_COMPLEX, SIREC_FORMAT_RAW_F32));
  check(sirec_image_write(image, mag.c_str(), SIREC_PART_MAGNITUDE, SIREC_FORMAT_RAW_F32));
  check(sirec_image_write(image, phase.c_str(), SIREC_PART_PHASE, SIREC_FORMAT_RAW_F32));
  outputs.insert(outputs.end(), {cplx, mag, phase});
  if (pgm) {
    const std::string mag_pgm = (dir / (stem + ".mag.pgm")).string();
    const std::string phase_pgm = (dir / (stem + ".phase.pgm")).string();
    check(sirec_image_write(image, mag_pgm.c_str(), SIREC_PART_MAGNITUDE, SIREC_FORMAT_PGM16));
    check(sirec_image_write(image, phase_pgm.c_str(), SIREC_PART_PHASE, SIREC_FORMAT_PGM16));
    outputs.insert(outputs.end(), {mag_pgm, phase_pgm});
  }
}

// Built-in phantom description used when --spec is omitted: the classic head
// phantom with a gentle polynomial phase and a 4x-accelerated mask.
const char* kDefaultPhantomSpec = R"json({
  "d1": 64, "d2": 64, "coils": 4,
  "shepp_logan": true,
  "phase": [
    {"p": 1, "q": 0, "coeff": 1.2},
    {"p": 0, "q": 1, "coeff": -0.8},
    {"p": 1, "q": 1, "coeff": 0.7},
    {"p": 2, "q": 0, "coeff": 0.5}
  ],
  "noise_std": 0.0,
  "seed": 7,
  "mask": {"r": 4, "acs": 12}
})json";

// ---- phantom --------------------------------------------------------------

struct PhantomArgs {
  std::string spec_path;
  std::string out_dir;
  bool full_kspc = false;
  bool pgm = false;
};

int cmd_phantom(const PhantomArgs& args, const std::vector<std::string>& argv) {
  Stopwatch watch;
  ensure_dir(args.out_dir);
  const fs::path dir(args.out_dir);

  const std::string spec_text =
      args.spec_path.empty() ? std::string(kDefaultPhantomSpec) : read_text_file(args.spec_path);
  sirec_phantom_spec* spec = nullptr;
  check(sirec_phantom_spec_parse(spec_text.c_str(), &spec));
  int64_t d1 = 0, d2 = 0, coils = 0, d_pe = 0, r = 0, acs = 0;
  uint64_t seed = 0;
  double noise_std = 0.0;
  check(sirec_phantom_spec_info(spec, &d1, &d2, &coils, &seed, &noise_std, &d_pe, &r, &acs));

  sirec_image* truth = nullptr;
  check(sirec_phantom_image(spec, &truth));
  sirec_sens* sens = nullptr;
  check(sirec_simulate_coils(coils, d1, d2, seed, &sens));
  sirec_mask* mask = nullptr;
  check(sirec_make_mask(d_pe, r, acs, d1, &mask));

  std::vector<std::string> outputs;
  const std::string truth_cplx = (dir / "truth.cplx.f32").string();
  const std::string truth_mag = (dir / "truth.mag.f32").string();
  const std::string sens_path = (dir / "sens.cplx.f32").string();
  const std::string kspc_path = (dir / "phantom.kspc").string();
  check(sirec_image_write(truth, truth_cplx.c_str(), SIREC_PART_COMPLEX, SIREC_FORMAT_RAW_F32));
  check(sirec_image_write(truth, truth_mag.c_str(), SIREC_PART_MAGNITUDE, SIREC_FORMAT_RAW_F32));
  check(sirec_sens_write_raw(sens, sens_path.c_str()));

  sirec_kspace* acquired = nullptr;
  check(sirec_acquire(truth, sens, mask, noise_std, seed, &acquired));
  check(sirec_kspace_write(acquired, kspc_path.c_str()));
  outputs.insert(outputs.end(), {truth_cplx, truth_mag, sens_path, kspc_path});

  if (args.full_kspc) {
    sirec_mask* full = nullptr;
    check(sirec_full_mask(d1, d2, &full));
    sirec_kspace* full_kspace = nullptr;
    check(sirec_acquire(truth, sens, full, noise_std, seed, &full_kspace));
    const std::string full_path = (dir / "full.kspc").string();
    check(sirec_kspace_write(full_kspace, full_path.c_str()));
    outputs.push_back(full_path);
    sirec_kspace_free(full_kspace);
    sirec_mask_free(full);
  }
  if (args.pgm) {
    const std::string mag_pgm = (dir / "truth.mag.pgm").string();
    const std::string phase_pgm = (dir / "truth.phase.pgm").string();
    check(sirec_image_write(truth, mag_pgm.c_str(), SIREC_PART_MAGNITUDE, SIREC_FORMAT_PGM16));
    check(sirec_image_write(truth, phase_pgm.c_str(), SIREC_PART_PHASE, SIREC_FORMAT_PGM16));
    outputs.insert(outputs.end(), {mag_pgm, phase_pgm});
  }

  double rate = 0.0;
  check(sirec_mask_rate(mask, &rate));
  std::cout << "phantom: " << d1 << "x" << d2 << ", " << coils << " coils, R=" << r
            << ", ACS=" << acs << ", rate=" << rate << "\n";

  write_manifest(dir, "phantom", argv,
                 json{{"spec", args.spec_path.empty() ? "<builtin>" : args.spec_path}},
                 json(outputs), json{{"seed", seed}}, watch.seconds());
  sirec_kspace_free(acquired);
  sirec_mask_free(mask);
  sirec_sens_free(sens);
  sirec_image_free(truth);
  sirec_phantom_spec_free(spec);
  return kExitOk;
}

// ---- mask -----------------------------------------------------------------

struct MaskArgs {
  int64_t d_pe = 0;
  int64_t r = 1;
  int64_t acs = 0;
  int64_t d1 = 1;
  std::string out_path;
};

int cmd_mask(const MaskArgs& args, const std::vector<std::string>& argv) {
  Stopwatch watch;
  sirec_mask* mask = nullptr;
  check(sirec_make_mask(args.d_pe, args.r, args.acs, args.d1, &mask));
  int64_t count = 0;
  check(sirec_mask_kept(mask, nullptr, 0, &count));
  std::vector<int64_t> lines(static_cast<size_t>(count));
  check(sirec_mask_kept(mask, lines.data(), count, &count));
  double rate = 0.0;
  check(sirec_mask_rate(mask, &rate));

  std::cout << "mask: d_pe=" << args.d_pe << " R=" << args.r << " ACS=" << args.acs
            << " kept=" << count << " rate=" << rate << "\n";
  if (!args.out_path.empty()) {
    const fs::path out(args.out_path);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    std::ofstream csv(out, std::ios::trunc);
    if (!csv.good()) usage_error("cannot write " + args.out_path);
    csv << "line\n";
    for (int64_t line : lines) csv << line << "\n";
    csv.close();
    write_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), "mask", argv,
                   json::object(), json{args.out_path},
                   json::object(), watch.seconds());
  }
  sirec_mask_free(mask);
  return kExitOk;
}

// ---- recon ----------------------------------------------------------------

struct ReconArgs {
  std::string in_path;
  std::string out_dir;
  std::string config_path;
  std::string variant;
  std::optional<int64_t> iters;
  std::optional<double> w0;
  std::optional<double> lambda;
  std::optional<std::string> precision;
  std::optional<uint64_t> seed_inr;
  std::optional<uint64_t> seed_poly;
};

sirec_config* build_config(const std::string& config_path, const std::string& variant,
                           const ReconArgs* overrides) {
  sirec_config* cfg = nullptr;
  if (config_path.empty()) {
    check(sirec_config_create(&cfg));
  } else {
    check(sirec_config_load(config_path.c_str(), &cfg));
  }
  if (!variant.empty()) check(sirec_config_set_variant(cfg, variant.c_str()));
  if (overrides != nullptr) {
    json patch = json::object();
    if (overrides->iters) patch["iters"] = *overrides->iters;
    if (overrides->w0) patch["w0"] = *overrides->w0;
    if (overrides->lambda) patch["lambda"] = *overrides->lambda;
    if (overrides->precision) patch["precision"] = *overrides->precision;
    if (overrides->seed_inr) patch["seed_inr"] = *overrides->seed_inr;
    if (overrides->seed_poly) patch["seed_poly"] = *overrides->seed_poly;
    if (!patch.empty()) check(sirec_config_update_json(cfg, patch.dump().c_str()));
  }
  return cfg;
}

int cmd_recon(const ReconArgs& args, const std::vector<std::string>& argv) {
  Stopwatch watch;
  ensure_dir(args.out_dir);
  const fs::path dir(args.out_dir);

  sirec_kspace* measured = nullptr;
  check(sirec_kspace_read(args.in_path.c_str(), &measured));
  sirec_config* cfg = build_config(args.config_path, args.variant, &args);

  const std::string resolved_cfg = (dir / "config.json").string();
  check(sirec_config_save(cfg, resolved_cfg.c_str()));

  const std::string abort_path = (dir / "abort.imjw").string();
  sirec_model* model = nullptr;
  sirec_result* result = nullptr;
  const sirec_status status =
      sirec_reconstruct(measured, cfg, abort_path.c_str(), &model, &result);
  if (status != SIREC_OK) die(status);

  std::vector<std::string> outputs{resolved_cfg};
  sirec_image* combined = nullptr;
  check(sirec_result_combined(result, &combined));
  write_image_products(combined, dir, "combined", outputs, /*pgm=*/true);

  sirec_image* network = nullptr;
  check(sirec_result_network_image(result, &network));
  const std::string network_path = (dir / "network.cplx.f32").string();
  check(sirec_image_write(network, network_path.c_str(), SIREC_PART_COMPLEX,
                          SIREC_FORMAT_RAW_F32));
  outputs.push_back(network_path);

  sirec_kspace* composite = nullptr;
  check(sirec_result_composite(result, &composite));
  const std::string composite_path = (dir / "composite.kspc").string();
  check(sirec_kspace_write(composite, composite_path.c_str()));
  outputs.push_back(composite_path);

  const std::string ckpt_path = (dir / "checkpoint.imjw").string();
  check(sirec_model_save(model, ckpt_path.c_str()));
  outputs.push_back(ckpt_path);

  const std::string history_path = (dir / "history.csv").string();
  check(sirec_model_history_csv(model, history_path.c_str()));
  outputs.push_back(history_path);

  int64_t history_len = 0;
  check(sirec_model_info(model, nullptr, nullptr, nullptr, &history_len));
  char* cfg_json = nullptr;
  check(sirec_config_to_json(cfg, &cfg_json));
  const json cfg_doc = json::parse(cfg_json);
  sirec_string_free(cfg_json);

  std::cout << "recon: " << args.in_path << " -> " << args.out_dir << " (" << history_len
            << " iterations, " << watch.seconds() << " s)\n";
  write_manifest(dir, "recon", argv,
                 json{{"kspace", args.in_path},
                      {"config", args.config_path.empty() ? "<defaults>" : args.config_path},
                      {"variant", args.variant.empty() ? "full" : args.variant}},
                 json(outputs),
                 json{{"seed_inr", cfg_doc["seed_inr"]}, {"seed_poly", cfg_doc["seed_poly"]}},
                 watch.seconds());

  sirec_kspace_free(composite);
  sirec_image_free(network);
  sirec_image_free(combined);
  sirec_result_free(result);
  sirec_model_free(model);
  sirec_config_free(cfg);
  sirec_kspace_free(measured);
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalCase {
  std::string id;
  std::string ref;
  std::string test;
  int64_t d1 = 0;
  int64_t d2 = 0;
  int64_t r = 0;
  int64_t acs = 0;
  std::string variant = "full";
  double seconds = 0.0;
};

EvalCase parse_eval_case(const std::string& text, size_t index) {
  EvalCase c;
  c.id = "case" + std::to_string(index);
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const size_t eq = token.find('=');
    if (eq == std::string::npos) usage_error("bad --case token \"" + token + "\" (want key=value)");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    try {
      if (key == "id") {
        c.id = value;
      } else if (key == "ref") {
        c.ref = value;
      } else if (key == "test") {
        c.test = value;
      } else if (key == "d1") {
        c.d1 = std::stoll(value);
      } else if (key == "d2") {
        c.d2 = std::stoll(value);
      } else if (key == "r") {
        c.r = std::stoll(value);
      } else if (key == "acs") {
        c.acs = std::stoll(value);
      } else if (key == "variant") {
        c.variant = value;
      } else if (key == "seconds") {
        c.seconds = std::stod(value);
      } else {
        usage_error("unknown --case key \"" + key + "\"");
      }
    } catch (const std::exception&) {
      usage_error("bad value for --case key \"" + key + "\": " + value);
    }
  }
  if (c.ref.empty()) usage_error("--case is missing the \"ref\" field");
  if (c.test.empty()) usage_error("--case is missing the \"test\" field");
  if (c.d1 <= 0 || c.d2 <= 0) usage_error("--case is missing positive d1/d2 fields");
  return c;
}

int cmd_eval(const std::vector<std::string>& case_specs, const std::string& out_path,
             int64_t jobs, const std::vector<std::string>& argv) {
  Stopwatch watch;
  std::vector<EvalCase> cases;
  for (size_t i = 0; i < case_specs.size(); ++i) {
    cases.push_back(parse_eval_case(case_specs[i], i));
  }

  struct Row {
    double psnr = 0.0, ssim = 0.0;
    sirec_status status = SIREC_OK;
    std::string error;
  };
  std::vector<Row> rows(cases.size());

  // Metric evaluations are pure, so cases can run on worker threads.
  std::mutex next_mutex;
  size_t next = 0;
  const auto worker = [&] {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next >= cases.size()) return;
        i = next++;
      }
      rows[i].status = sirec_eval_files(cases[i].ref.c_str(), cases[i].test.c_str(), cases[i].d1,
                                        cases[i].d2, &rows[i].psnr, &rows[i].ssim);
      if (rows[i].status != SIREC_OK) rows[i].error = sirec_last_error();
    }
  };
  const int64_t n_threads = std::max<int64_t>(1, std::min<int64_t>(jobs, static_cast<int64_t>(cases.size())));
  std::vector<std::thread> pool;
  for (int64_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  for (size_t i = 0; i < cases.size(); ++i) {
    if (rows[i].status != SIREC_OK) {
      std::cerr << "error: case " << cases[i].id << ": " << rows[i].error << "\n";
      return rows[i].status == SIREC_ERR_NUMERIC ? kExitNumeric : kExitUsage;
    }
  }

  const fs::path out(out_path);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  std::ofstream csv(out, std::ios::trunc);
  if (!csv.good()) usage_error("cannot write " + out_path);
  csv << "case,R,ACS,variant,psnr_db,ssim,seconds\n";
  csv.precision(17);
  for (size_t i = 0; i < cases.size(); ++i) {
    const double capped = std::min(rows[i].psnr, 999.0);
    csv << cases[i].id << ',' << cases[i].r << ',' << cases[i].acs << ',' << cases[i].variant
        << ',' << capped << ',' << rows[i].ssim << ',' << cases[i].seconds << "\n";
    std::cout << cases[i].id << ": psnr_db=" << capped << " ssim=" << rows[i].ssim << "\n";
  }
  csv.close();

  write_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), "eval", argv,
                 json(case_specs), json{out_path}, json::object(), watch.seconds());
  return kExitOk;
}

// ---- tune -----------------------------------------------------------------

struct TuneArgs {
  std::vector<std::string> kspc;
  std::vector<std::string> truth;
  std::string out_dir;
  std::string config_path;
  std::string variant;
  std::optional<int64_t> iters;
  int64_t total = 24;
  int64_t init = 4;
  uint64_t seed = 1;
  double w0_lo = 10.0, w0_hi = 50.0;
  double lambda_lo = 0.0, lambda_hi = 100.0;
};

int cmd_tune(const TuneArgs& args, const std::vector<std::string>& argv) {
  Stopwatch watch;
  if (args.kspc.size() != args.truth.size()) {
    usage_error("--kspc and --truth must be given the same number of times");
  }
  if (args.kspc.empty()) usage_error("tune needs at least one --kspc/--truth pair");
  ensure_dir(args.out_dir);
  const fs::path dir(args.out_dir);

  sirec_config* base = nullptr;
  if (args.config_path.empty()) {
    check(sirec_config_create(&base));
  } else {
    check(sirec_config_load(args.config_path.c_str(), &base));
  }
  if (!args.variant.empty()) check(sirec_config_set_variant(base, args.variant.c_str()));
  if (args.iters) {
    const json patch{{"iters", *args.iters}};
    check(sirec_config_update_json(base, patch.dump().c_str()));
  }

  std::vector<const char*> kspc_ptrs, truth_ptrs;
  for (const std::string& s : args.kspc) kspc_ptrs.push_back(s.c_str());
  for (const std::string& s : args.truth) truth_ptrs.push_back(s.c_str());

  const int64_t init = std::min(args.init, args.total);
  sirec_trace* trace = nullptr;
  sirec_config* best = nullptr;
  check(sirec_tune(kspc_ptrs.data(), truth_ptrs.data(), static_cast<int64_t>(kspc_ptrs.size()),
                   base, args.w0_lo, args.w0_hi, args.lambda_lo, args.lambda_hi, args.total, init,
                   args.seed, &trace, &best));

  const std::string trace_path = (dir / "trace.csv").string();
  const std::string best_path = (dir / "best.json").string();
  check(sirec_trace_write_csv(trace, trace_path.c_str()));
  check(sirec_config_save(best, best_path.c_str()));

  double w0 = 0.0, lambda = 0.0, score = 0.0;
  check(sirec_trace_best(trace, &w0, &lambda, &score));
  std::cout << "tune: best w0=" << w0 << " lambda=" << lambda << " score=" << score << "\n";

  write_manifest(dir, "tune", argv, json{{"kspc", args.kspc}, {"truth", args.truth}},
                 json{trace_path, best_path}, json{{"seed", args.seed}}, watch.seconds());
  sirec_config_free(best);
  sirec_trace_free(trace);
  sirec_config_free(base);
  return kExitOk;
}

// ---- upsample -------------------------------------------------------------

struct UpsampleArgs {
  std::string checkpoint;
  int64_t scale = 2;
  std::string out_dir;
};

int cmd_upsample(const UpsampleArgs& args, const std::vector<std::string>& argv) {
  Stopwatch watch;
  ensure_dir(args.out_dir);
  const fs::path dir(args.out_dir);

  sirec_model* model = nullptr;
  check(sirec_model_load(args.checkpoint.c_str(), &model));
  sirec_image* image = nullptr;
  check(sirec_model_query(model, args.scale, &image));

  int64_t d1 = 0, d2 = 0;
  check(sirec_image_dims(image, &d1, &d2));
  std::vector<std::string> outputs;
  write_image_products(image, dir, "upsampled", outputs, /*pgm=*/true);
  std::cout << "upsample: x" << args.scale << " -> " << d1 << "x" << d2 << "\n";

  write_manifest(dir, "upsample", argv,
                 json{{"checkpoint", args.checkpoint}, {"scale", args.scale}}, json(outputs),
                 json::object(), watch.seconds());
  sirec_image_free(image);
  sirec_model_free(model);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> argv_copy(argv, argv + argc);
  CLI::App app{"sirec: scan-specific parallel-MRI reconstruction"};
  app.set_version_flag("--version", sirec_version());
  app.require_subcommand(1);

  PhantomArgs phantom;
  CLI::App* cmd_ph = app.add_subcommand("phantom", "Generate a synthetic acquisition");
  cmd_ph->add_option("--spec", phantom.spec_path, "Phantom spec JSON (builtin default if omitted)");
  cmd_ph->add_option("--out", phantom.out_dir, "Output directory")->required();
  cmd_ph->add_flag("--full-kspc", phantom.full_kspc, "Also write fully sampled k-space");
  cmd_ph->add_flag("--pgm", phantom.pgm, "Also write PGM previews of the truth image");

  MaskArgs mask;
  CLI::App* cmd_mk = app.add_subcommand("mask", "Inspect an undersampling mask");
  cmd_mk->add_option("--d-pe", mask.d_pe, "Phase-encode line count")->required();
  cmd_mk->add_option("--r", mask.r, "Acceleration factor")->required();
  cmd_mk->add_option("--acs", mask.acs, "Auto-calibration line count")->required();
  cmd_mk->add_option("--d1", mask.d1, "Readout dimension (cosmetic)");
  cmd_mk->add_option("--out", mask.out_path, "Write kept lines as CSV");

  ReconArgs recon;
  CLI::App* cmd_rc = app.add_subcommand("recon", "Reconstruct from undersampled k-space");
  cmd_rc->add_option("--in", recon.in_path, "Input KSPC file")->required();
  cmd_rc->add_option("--out", recon.out_dir, "Output directory")->required();
  cmd_rc->add_option("--config", recon.config_path, "Config JSON (defaults if omitted)");
  cmd_rc->add_option("--variant", recon.variant, "full|no-tv|no-kc|relu|relu-pe");
  cmd_rc->add_option("--iters", recon.iters, "Override iteration count");
  cmd_rc->add_option("--w0", recon.w0, "Override the sine frequency scale");
  cmd_rc->add_option("--lambda", recon.lambda, "Override the TV weight");
  cmd_rc->add_option("--precision", recon.precision, "single|double");
  cmd_rc->add_option("--seed-inr", recon.seed_inr, "Network init seed");
  cmd_rc->add_option("--seed-poly", recon.seed_poly, "Polynomial init seed");

  std::vector<std::string> eval_cases;
  std::string eval_out;
  int64_t eval_jobs = 1;
  CLI::App* cmd_ev = app.add_subcommand("eval", "PSNR/SSIM between magnitude images");
  cmd_ev->add_option("--case", eval_cases,
                     "Repeated; comma-separated key=value with keys "
                     "ref,test,d1,d2[,id,r,acs,variant,seconds]")
      ->required();
  cmd_ev->add_option("--out", eval_out, "Output CSV path")->required();
  cmd_ev->add_option("--jobs", eval_jobs, "Worker threads for independent cases");

  TuneArgs tune;
  CLI::App* cmd_tn = app.add_subcommand("tune", "Bayesian search over (w0, lambda)");
  cmd_tn->add_option("--kspc", tune.kspc, "Training-case KSPC file (repeatable)")->required();
  cmd_tn->add_option("--truth", tune.truth, "Matching truth magnitude .f32 (repeatable)")
      ->required();
  cmd_tn->add_option("--out", tune.out_dir, "Output directory")->required();
  cmd_tn->add_option("--config", tune.config_path, "Base config JSON");
  cmd_tn->add_option("--variant", tune.variant, "Ablation preset for the base config");
  cmd_tn->add_option("--iters", tune.iters, "Override iteration count for search runs");
  cmd_tn->add_option("--total", tune.total, "Total evaluations");
  cmd_tn->add_option("--init", tune.init, "Random initial points");
  cmd_tn->add_option("--seed", tune.seed, "Search seed");
  cmd_tn->add_option("--w0-lo", tune.w0_lo, "w0 lower bound");
  cmd_tn->add_option("--w0-hi", tune.w0_hi, "w0 upper bound");
  cmd_tn->add_option("--lambda-lo", tune.lambda_lo, "lambda lower bound");
  cmd_tn->add_option("--lambda-hi", tune.lambda_hi, "lambda upper bound");

  UpsampleArgs upsample;
  CLI::App* cmd_up = app.add_subcommand("upsample", "Query a checkpoint on a denser grid");
  cmd_up->add_option("--checkpoint", upsample.checkpoint, "Checkpoint file")->required();
  cmd_up->add_option("--scale", upsample.scale, "Integer upsampling factor")->required();
  cmd_up->add_option("--out", upsample.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_ph->parsed()) return cmd_phantom(phantom, argv_copy);
    if (cmd_mk->parsed()) return cmd_mask(mask, argv_copy);
    if (cmd_rc->parsed()) return cmd_recon(recon, argv_copy);
    if (cmd_ev->parsed()) return cmd_eval(eval_cases, eval_out, eval_jobs, argv_copy);
    if (cmd_tn->parsed()) return cmd_tune(tune, argv_copy);
    if (cmd_up->parsed()) return cmd_upsample(upsample, argv_copy);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
