#include "core/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/mrop.hpp"
#include "core/rng.hpp"

namespace sirec {

namespace {

constexpr double kPi = std::numbers::pi;

// Modified Shepp-Logan head phantom: (cx, cy, a, b, angle_deg, intensity).
// Intensities are the "modified" set so the superposed image stays in [0, 1].
const std::array<Ellipse, 10> kSheppLogan = {{
    {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
    {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
    {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},
    {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
    {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
    {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},
    {0.06, -0.605, 0.046, 0.023, 90.0, 0.1},
}};

double axis_coord(int64_t index, int64_t dim) {
  if (dim == 1) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(index) / static_cast<double>(dim - 1);
}

bool inside_ellipse(const Ellipse& e, double x, double y) {
  const double rad = e.angle_deg * kPi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double dx = x - e.cx, dy = y - e.cy;
  const double xr = c * dx + s * dy;
  const double yr = -s * dx + c * dy;
  if (e.a <= 0 || e.b <= 0) return false;
  const double u = xr / e.a, v = yr / e.b;
  return u * u + v * v <= 1.0;
}

// Wrap an angle to (-pi, pi].
double wrap_phase(double phi) {
  double w = std::remainder(phi, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    require(known, ErrCode::invalid_argument,
            std::string("unknown key \"") + item.key() + "\" in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrCode::invalid_argument, std::string("bad value for \"") + key + "\": " + e.what());
  }
}

}  // namespace

PhantomSpec phantom_spec_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrCode::invalid_argument, std::string("phantom spec is not valid JSON: ") + e.what());
  }
  require(root.is_object(), ErrCode::invalid_argument, "phantom spec must be a JSON object");
  reject_unknown_keys(root,
                      {"d1", "d2", "coils", "shepp_logan", "ellipses", "phase", "noise_std",
                       "seed", "mask"},
                      "phantom spec");

  for (const char* key : {"d1", "d2"}) {
    require(root.contains(key), ErrCode::invalid_argument,
            std::string("phantom spec is missing required field \"") + key + "\"");
  }

  PhantomSpec spec;
  spec.d1 = get_or<int64_t>(root, "d1", spec.d1);
  spec.d2 = get_or<int64_t>(root, "d2", spec.d2);
  spec.coils = get_or<int64_t>(root, "coils", spec.coils);
  spec.shepp_logan = get_or<bool>(root, "shepp_logan", spec.shepp_logan);
  spec.noise_std = get_or<double>(root, "noise_std", spec.noise_std);
  spec.seed = get_or<uint64_t>(root, "seed", spec.seed);

  if (root.contains("ellipses")) {
    const json& arr = root.at("ellipses");
    require(arr.is_array(), ErrCode::invalid_argument, "\"ellipses\" must be an array");
    for (const json& item : arr) {
      require(item.is_object(), ErrCode::invalid_argument, "each ellipse must be an object");
      reject_unknown_keys(item, {"cx", "cy", "a", "b", "angle_deg", "intensity"}, "ellipse");
      Ellipse e;
      e.cx = get_or<double>(item, "cx", 0.0);
      e.cy = get_or<double>(item, "cy", 0.0);
      e.a = get_or<double>(item, "a", 0.0);
      e.b = get_or<double>(item, "b", 0.0);
      e.angle_deg = get_or<double>(item, "angle_deg", 0.0);
      e.intensity = get_or<double>(item, "intensity", 0.0);
      spec.ellipses.push_back(e);
    }
  }
  if (root.contains("phase")) {
    const json& arr = root.at("phase");
    require(arr.is_array(), ErrCode::invalid_argument, "\"phase\" must be an array");
    for (const json& item : arr) {
      require(item.is_object(), ErrCode::invalid_argument, "each phase term must be an object");
      reject_unknown_keys(item, {"p", "q", "coeff"}, "phase term");
      PhaseTerm t;
      t.p = get_or<int64_t>(item, "p", 0);
      t.q = get_or<int64_t>(item, "q", 0);
      t.coeff = get_or<double>(item, "coeff", 0.0);
      require(t.p >= 0 && t.q >= 0, ErrCode::invalid_argument,
              "phase term exponents must be non-negative");
      spec.phase.push_back(t);
    }
  }
  if (root.contains("mask")) {
    const json& m = root.at("mask");
    require(m.is_object(), ErrCode::invalid_argument, "\"mask\" must be an object");
    reject_unknown_keys(m, {"d_pe", "r", "acs"}, "mask spec");
    spec.mask.d_pe = get_or<int64_t>(m, "d_pe", 0);
    spec.mask.r = get_or<int64_t>(m, "r", spec.mask.r);
    spec.mask.acs = get_or<int64_t>(m, "acs", spec.mask.acs);
  }
  require(spec.d1 >= 2 && spec.d2 >= 2, ErrCode::invalid_argument,
          "phantom dimensions must be at least 2x2");
  require(spec.coils >= 1, ErrCode::invalid_argument, "phantom needs at least one coil");
  require(spec.noise_std >= 0, ErrCode::invalid_argument, "noise_std must be non-negative");
  return spec;
}

PhantomSpec load_phantom_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrCode::io, "cannot open phantom spec: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return phantom_spec_from_json_text(buf.str());
}

ComplexImage make_phantom(const PhantomSpec& spec) {
  require(spec.d1 >= 1 && spec.d2 >= 1, ErrCode::invalid_argument,
          "phantom dimensions must be positive");
  const Ellipse* ellipses = spec.ellipses.data();
  size_t n_ellipses = spec.ellipses.size();
  if (spec.shepp_logan && spec.ellipses.empty()) {
    ellipses = kSheppLogan.data();
    n_ellipses = kSheppLogan.size();
  }

  ComplexImage img;
  img.d1 = spec.d1;
  img.d2 = spec.d2;
  img.v.resize(static_cast<size_t>(spec.d1 * spec.d2));
  for (int64_t i = 0; i < spec.d1; ++i) {
    const double y = axis_coord(i, spec.d1);
    for (int64_t j = 0; j < spec.d2; ++j) {
      const double x = axis_coord(j, spec.d2);
      double mag = 0.0;
      for (size_t k = 0; k < n_ellipses; ++k) {
        if (inside_ellipse(ellipses[k], x, y)) mag += ellipses[k].intensity;
      }
      mag = std::clamp(mag, 0.0, 1.0);
      double phi = 0.0;
      for (const PhaseTerm& t : spec.phase) {
        phi += t.coeff * std::pow(x, static_cast<double>(t.p)) *
               std::pow(y, static_cast<double>(t.q));
      }
      phi = wrap_phase(phi);
      img.v[static_cast<size_t>(i * spec.d2 + j)] =
          std::complex<double>(mag * std::cos(phi), mag * std::sin(phi));
    }
  }
  return img;
}

SensitivityField simulate_coils(int64_t coils, int64_t d1, int64_t d2, uint64_t seed) {
  require(coils >= 1, ErrCode::invalid_argument, "simulate_coils needs at least one coil");
  require(d1 >= 1 && d2 >= 1, ErrCode::invalid_argument, "coil map dimensions must be positive");

  // Gaussian bump centered outside the FOV plus a constant floor; the width
  // and floor constants keep |forward difference| < 5/d and RSS >= 0.1.
  constexpr double kFloor = 0.15;
  constexpr double kSigma = 0.9;
  constexpr double kRadius = 1.3;

  SensitivityField field;
  field.coils = coils;
  field.d1 = d1;
  field.d2 = d2;
  field.v.resize(static_cast<size_t>(coils * d1 * d2));

  Rng rng(seed);
  for (int64_t c = 0; c < coils; ++c) {
    const double theta =
        2.0 * kPi * static_cast<double>(c) / static_cast<double>(coils) + rng.uniform(-0.1, 0.1);
    const double cx = kRadius * std::cos(theta);
    const double cy = kRadius * std::sin(theta);
    const double px = rng.uniform(-1.0, 1.0);
    const double py = rng.uniform(-1.0, 1.0);
    const double gamma = rng.uniform(-kPi, kPi);
    std::complex<double>* dst = field.v.data() + static_cast<size_t>(c * d1 * d2);
    for (int64_t i = 0; i < d1; ++i) {
      const double y = axis_coord(i, d1);
      for (int64_t j = 0; j < d2; ++j) {
        const double x = axis_coord(j, d2);
        const double dx = x - cx, dy = y - cy;
        const double mag = kFloor + std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
        const double phi = px * x + py * y + gamma;
        dst[i * d2 + j] = std::complex<double>(mag * std::cos(phi), mag * std::sin(phi));
      }
    }
  }
  return field;
}

SamplingMask make_mask(const MaskSpec& spec, int64_t d1) {
  require(spec.d_pe >= 1, ErrCode::invalid_argument, "mask needs at least one phase-encode line");
  require(spec.r >= 1 && spec.r <= spec.d_pe, ErrCode::invalid_argument,
          "acceleration factor must satisfy 1 <= R <= d_pe");
  require(spec.acs >= 0 && spec.acs <= spec.d_pe, ErrCode::invalid_argument,
          "ACS count must satisfy 0 <= ACS <= d_pe");
  require(d1 >= 1, ErrCode::invalid_argument, "mask readout dimension must be positive");

  std::set<int64_t> kept;
  for (int64_t line = 0; line < spec.d_pe; line += spec.r) kept.insert(line);
  if (spec.acs > 0) {
    const int64_t start = spec.d_pe / 2 - spec.acs / 2;
    const int64_t end = start + spec.acs - 1;
    require(start >= 0 && end < spec.d_pe, ErrCode::invalid_argument,
            "ACS block exceeds phase-encode bounds");
    for (int64_t line = start; line <= end; ++line) kept.insert(line);
  }

  SamplingMask mask;
  mask.d1 = d1;
  mask.d2 = spec.d_pe;
  mask.kept_centered.assign(kept.begin(), kept.end());
  return mask;
}

double undersampling_rate(const SamplingMask& mask) {
  require(mask.d2 >= 1, ErrCode::invalid_argument, "mask has no phase-encode lines");
  return static_cast<double>(mask.kept_count()) / static_cast<double>(mask.d2);
}

KSpaceVolume acquire(const ComplexImage& truth, const SensitivityField& coils,
                     const SamplingMask& mask, double noise_std, uint64_t seed) {
  require(noise_std >= 0, ErrCode::invalid_argument, "noise std must be non-negative");
  require(coils.d1 == truth.d1 && coils.d2 == truth.d2, ErrCode::invalid_argument,
          "coil maps and image dimensions disagree");
  require(mask.d1 == truth.d1 && mask.d2 == truth.d2, ErrCode::invalid_argument,
          "mask and image dimensions disagree");

  // The noiseless path reuses the forward model verbatim so that simulated
  // acquisitions and predicted k-space are bit-identical when they should be.
  if (noise_std == 0.0) return forward_model_plain(truth, coils, mask);

  KSpaceVolume vol;
  vol.coils = coils.coils;
  vol.d1 = truth.d1;
  vol.d2 = truth.d2;
  vol.mask = mask;
  vol.v.resize(static_cast<size_t>(coils.coils * truth.d1 * truth.d2));

  Rng rng(seed);
  const size_t plane = static_cast<size_t>(truth.d1 * truth.d2);
  ComplexImage weighted;
  weighted.d1 = truth.d1;
  weighted.d2 = truth.d2;
  weighted.v.resize(plane);
  for (int64_t c = 0; c < coils.coils; ++c) {
    const std::complex<double>* sens = coils.v.data() + static_cast<size_t>(c) * plane;
    for (size_t p = 0; p < plane; ++p) weighted.v[p] = sens[p] * truth.v[p];
    ComplexImage spectrum = fft2_plain(weighted);
    std::complex<double>* dst = vol.v.data() + static_cast<size_t>(c) * plane;
    for (size_t p = 0; p < plane; ++p) {
      dst[p] = spectrum.v[p] + std::complex<double>(rng.normal(0.0, noise_std),
                                                    rng.normal(0.0, noise_std));
    }
  }
  apply_mask(vol);
  return vol;
}

}  // namespace sirec
