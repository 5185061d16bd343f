#include "core/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace sirec {

namespace {

constexpr uint16_t kKspcVersion = 1;
constexpr uint16_t kCkptVersion = 1;

// ---- little-endian byte packing (explicit so files are host-independent) ---

void put_bytes(std::vector<uint8_t>& out, const void* src, size_t n) {
  const uint8_t* p = static_cast<const uint8_t*>(src);
  out.insert(out.end(), p, p + n);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  const uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
  put_bytes(out, b, 2);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  const uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                        static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  put_bytes(out, b, 4);
}

void put_f32(std::vector<uint8_t>& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u32(out, static_cast<uint32_t>(bits));
  put_u32(out, static_cast<uint32_t>(bits >> 32));
}

// Bounds-checked reader that reports the failing offset.
class Cursor {
 public:
  Cursor(const std::vector<uint8_t>& data, std::string path)
      : data_(data), path_(std::move(path)) {}

  size_t offset() const { return pos_; }
  size_t size() const { return data_.size(); }

  void need(size_t n, const char* what) {
    if (pos_ + n > data_.size()) {
      fail(ErrCode::io, path_ + ": truncated reading " + what + " at offset " +
                            std::to_string(pos_) + " (need " + std::to_string(pos_ + n) +
                            " bytes, file has " + std::to_string(data_.size()) + ")");
    }
  }

  void raw(void* dst, size_t n, const char* what) {
    need(n, what);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

  uint8_t u8(const char* what) {
    uint8_t v;
    raw(&v, 1, what);
    return v;
  }

  uint16_t u16(const char* what) {
    need(2, what);
    const uint16_t v = static_cast<uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + static_cast<size_t>(i)];
    pos_ += 4;
    return v;
  }

  float f32(const char* what) {
    const uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64(const char* what) {
    const uint32_t lo = u32(what);
    const uint64_t hi = u32(what);
    const uint64_t bits = (hi << 32) | lo;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void expect_end() {
    if (pos_ != data_.size()) {
      fail(ErrCode::io, path_ + ": trailing data (expected " + std::to_string(pos_) +
                            " bytes, file has " + std::to_string(data_.size()) + ")");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const std::vector<uint8_t>& data_;
  std::string path_;
  size_t pos_ = 0;
};

std::vector<uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrCode::io, "cannot open file: " + path);
  std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  require(!in.bad(), ErrCode::io, "read failure: " + path);
  return data;
}

void spit(const std::string& path, const void* data, size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrCode::io, "cannot open file for writing: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  out.flush();
  require(out.good(), ErrCode::io, "write failure: " + path);
}

void check_magic(Cursor& cur, const char expected[4], const char* kind) {
  char magic[4];
  cur.raw(magic, 4, "magic");
  if (std::memcmp(magic, expected, 4) != 0) {
    fail(ErrCode::io, cur.path() + ": bad magic for " + kind + " file (offset 0)");
  }
}

void write_branch(std::vector<uint8_t>& out, const std::vector<Layer>& branch) {
  for (const Layer& layer : branch) {
    for (double v : layer.w.vec()) put_f64(out, v);
    for (double v : layer.b.vec()) put_f64(out, v);
  }
}

std::vector<Layer> read_branch(Cursor& cur, const std::vector<std::pair<int64_t, int64_t>>& dims) {
  std::vector<Layer> branch;
  branch.reserve(dims.size());
  for (const auto& [rows, cols] : dims) {
    Layer layer;
    layer.w = Tensor<double>({rows, cols});
    layer.b = Tensor<double>({rows});
    for (double& v : layer.w.vec()) v = cur.f64("layer weights");
    for (double& v : layer.b.vec()) v = cur.f64("layer biases");
    branch.push_back(std::move(layer));
  }
  return branch;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  spit(path, text.data(), text.size());
}

}  // namespace

void write_kspc(const std::string& path, const KSpaceVolume& volume) {
  require(volume.coils >= 1 && volume.d1 >= 1 && volume.d2 >= 1, ErrCode::invalid_argument,
          "k-space volume is empty");
  require(volume.mask.d1 == volume.d1 && volume.mask.d2 == volume.d2, ErrCode::invalid_argument,
          "k-space volume mask dimensions disagree with data");
  require(volume.coils <= 0xffff, ErrCode::invalid_argument, "coil count exceeds format limit");
  require(std::is_sorted(volume.mask.kept_centered.begin(), volume.mask.kept_centered.end()),
          ErrCode::invalid_argument, "mask lines must be sorted");
  const size_t expected = static_cast<size_t>(volume.coils * volume.d1 * volume.d2);
  require(volume.v.size() == expected, ErrCode::invalid_argument,
          "k-space volume has wrong element count");

  std::vector<uint8_t> out;
  out.reserve(24 + volume.mask.kept_centered.size() * 4 + expected * 8);
  put_bytes(out, "KSPC", 4);
  put_u16(out, kKspcVersion);
  put_u16(out, static_cast<uint16_t>(volume.coils));
  put_u32(out, static_cast<uint32_t>(volume.d1));
  put_u32(out, static_cast<uint32_t>(volume.d2));
  put_u32(out, static_cast<uint32_t>(volume.mask.kept_centered.size()));
  for (int64_t line : volume.mask.kept_centered) {
    require(line >= 0 && line < volume.d2, ErrCode::invalid_argument,
            "mask line index out of range");
    put_u32(out, static_cast<uint32_t>(line));
  }
  for (const std::complex<double>& z : volume.v) {
    put_f32(out, static_cast<float>(z.real()));
    put_f32(out, static_cast<float>(z.imag()));
  }
  spit(path, out.data(), out.size());
}

KSpaceVolume read_kspc(const std::string& path) {
  const std::vector<uint8_t> data = slurp(path);
  Cursor cur(data, path);
  check_magic(cur, "KSPC", "k-space");
  const uint16_t version = cur.u16("version");
  require(version == kKspcVersion, ErrCode::io,
          path + ": unsupported KSPC version " + std::to_string(version));

  KSpaceVolume vol;
  vol.coils = cur.u16("coil count");
  vol.d1 = cur.u32("d1");
  vol.d2 = cur.u32("d2");
  require(vol.coils >= 1 && vol.d1 >= 1 && vol.d2 >= 1, ErrCode::io,
          path + ": empty k-space dimensions");
  const uint32_t lines = cur.u32("mask line count");
  require(lines <= vol.d2, ErrCode::io, path + ": mask has more lines than d2");
  vol.mask.d1 = vol.d1;
  vol.mask.d2 = vol.d2;
  vol.mask.kept_centered.resize(lines);
  int64_t prev = -1;
  for (uint32_t i = 0; i < lines; ++i) {
    const int64_t line = cur.u32("mask line index");
    require(line > prev, ErrCode::io, path + ": mask lines not strictly increasing");
    require(line < vol.d2, ErrCode::io, path + ": mask line index out of range");
    vol.mask.kept_centered[i] = line;
    prev = line;
  }
  const size_t count = static_cast<size_t>(vol.coils * vol.d1 * vol.d2);
  vol.v.resize(count);
  for (size_t i = 0; i < count; ++i) {
    const double re = cur.f32("k-space samples");
    const double im = cur.f32("k-space samples");
    vol.v[i] = std::complex<double>(re, im);
  }
  cur.expect_end();
  return vol;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  require(ckpt.d1 >= 1 && ckpt.d2 >= 1, ErrCode::invalid_argument,
          "checkpoint grid dimensions must be positive");
  require(!ckpt.inr.real_branch.empty(), ErrCode::invalid_argument,
          "checkpoint network has no layers");
  require(ckpt.inr.real_branch.size() == ckpt.inr.imag_branch.size(), ErrCode::invalid_argument,
          "checkpoint branches have different depths");
  require(ckpt.poly.coils >= 1 && ckpt.poly.coils <= 0xffff, ErrCode::invalid_argument,
          "checkpoint coil count out of range");
  require(ckpt.poly.order >= 0 && ckpt.poly.order <= 0xffff, ErrCode::invalid_argument,
          "checkpoint polynomial order out of range");

  std::vector<uint8_t> out;
  put_bytes(out, "IMJW", 4);
  put_u16(out, kCkptVersion);
  out.push_back(ckpt.inr.activation == Activation::sine ? 0 : 1);
  out.push_back(ckpt.inr.use_pe ? 1 : 0);
  put_u32(out, static_cast<uint32_t>(ckpt.inr.pe_bands));
  put_f64(out, ckpt.inr.w0);
  put_u32(out, static_cast<uint32_t>(ckpt.d1));
  put_u32(out, static_cast<uint32_t>(ckpt.d2));
  put_u16(out, static_cast<uint16_t>(ckpt.poly.coils));
  put_u16(out, static_cast<uint16_t>(ckpt.poly.order));
  put_u32(out, static_cast<uint32_t>(ckpt.inr.real_branch.size()));
  for (const Layer& layer : ckpt.inr.real_branch) {
    require(layer.w.shape().size() == 2 && layer.b.shape().size() == 1 &&
                layer.b.shape()[0] == layer.w.shape()[0],
            ErrCode::invalid_argument, "checkpoint layer has inconsistent shapes");
    const Layer& im = ckpt.inr.imag_branch[static_cast<size_t>(&layer - ckpt.inr.real_branch.data())];
    require(im.w.shape() == layer.w.shape() && im.b.shape() == layer.b.shape(),
            ErrCode::invalid_argument, "checkpoint branches have different layer shapes");
    put_u32(out, static_cast<uint32_t>(layer.w.shape()[0]));
    put_u32(out, static_cast<uint32_t>(layer.w.shape()[1]));
  }
  write_branch(out, ckpt.inr.real_branch);
  write_branch(out, ckpt.inr.imag_branch);
  const int64_t n_coeffs = ckpt.poly.coils * 2 * ckpt.poly.terms();
  require(static_cast<int64_t>(ckpt.poly.coeffs.vec().size()) == n_coeffs, ErrCode::invalid_argument,
          "checkpoint polynomial coefficient count is wrong");
  for (double v : ckpt.poly.coeffs.vec()) put_f64(out, v);
  spit(path, out.data(), out.size());
}

Checkpoint read_checkpoint(const std::string& path) {
  const std::vector<uint8_t> data = slurp(path);
  Cursor cur(data, path);
  check_magic(cur, "IMJW", "checkpoint");
  const uint16_t version = cur.u16("version");
  require(version == kCkptVersion, ErrCode::io,
          path + ": unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  const uint8_t act = cur.u8("activation");
  require(act <= 1, ErrCode::io, path + ": bad activation code");
  ckpt.inr.activation = act == 0 ? Activation::sine : Activation::relu;
  ckpt.inr.use_pe = cur.u8("use_pe flag") != 0;
  ckpt.inr.pe_bands = cur.u32("pe_bands");
  ckpt.inr.w0 = cur.f64("w0");
  require(std::isfinite(ckpt.inr.w0), ErrCode::io, path + ": non-finite w0");
  ckpt.d1 = cur.u32("d1");
  ckpt.d2 = cur.u32("d2");
  require(ckpt.d1 >= 1 && ckpt.d2 >= 1, ErrCode::io, path + ": empty grid dimensions");
  ckpt.poly.coils = cur.u16("coil count");
  ckpt.poly.order = cur.u16("polynomial order");
  require(ckpt.poly.coils >= 1, ErrCode::io, path + ": checkpoint has no coils");
  const uint32_t n_layers = cur.u32("layer count");
  require(n_layers >= 1 && n_layers <= 1024, ErrCode::io, path + ": bad layer count");

  std::vector<std::pair<int64_t, int64_t>> dims;
  dims.reserve(n_layers);
  int64_t prev_out = -1;
  for (uint32_t i = 0; i < n_layers; ++i) {
    const int64_t rows = cur.u32("layer rows");
    const int64_t cols = cur.u32("layer cols");
    require(rows >= 1 && cols >= 1, ErrCode::io, path + ": empty layer dimensions");
    require(prev_out < 0 || cols == prev_out, ErrCode::io,
            path + ": layer fan-in does not chain with previous fan-out");
    dims.emplace_back(rows, cols);
    prev_out = rows;
  }
  require(dims.back().first == 1, ErrCode::io, path + ": final layer must have one output");
  ckpt.inr.real_branch = read_branch(cur, dims);
  ckpt.inr.imag_branch = read_branch(cur, dims);

  ckpt.poly.coeffs = Tensor<double>(
      {ckpt.poly.coils, 2, ckpt.poly.order + 1, ckpt.poly.order + 1});
  for (double& v : ckpt.poly.coeffs.vec()) v = cur.f64("polynomial coefficients");
  cur.expect_end();
  return ckpt;
}

void write_pgm16(const std::string& path, const Tensor<double>& image, double lo, double hi) {
  require(image.shape().size() == 2, ErrCode::invalid_argument,
          "PGM output expects a 2-D image, got shape " + shape_str(image.shape()));
  require(hi > lo, ErrCode::invalid_argument, "PGM range must satisfy hi > lo");
  const int64_t d1 = image.shape()[0], d2 = image.shape()[1];
  std::string header = "P5\n" + std::to_string(d2) + " " + std::to_string(d1) + "\n65535\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.vec().size() * 2);
  for (double v : image.vec()) {
    double t = (v - lo) / (hi - lo);
    t = std::clamp(t, 0.0, 1.0);
    const uint16_t q = static_cast<uint16_t>(std::lround(t * 65535.0));
    out.push_back(static_cast<uint8_t>(q >> 8));  // PGM samples are big-endian
    out.push_back(static_cast<uint8_t>(q & 0xff));
  }
  spit(path, out.data(), out.size());
}

void write_raw_f32(const std::string& path, const std::vector<double>& values) {
  std::vector<uint8_t> out;
  out.reserve(values.size() * 4);
  for (double v : values) put_f32(out, static_cast<float>(v));
  spit(path, out.data(), out.size());
}

std::vector<float> read_raw_f32(const std::string& path) {
  const std::vector<uint8_t> data = slurp(path);
  require(data.size() % 4 == 0, ErrCode::io,
          path + ": raw float32 file size " + std::to_string(data.size()) +
              " is not a multiple of 4");
  Cursor cur(data, path);
  std::vector<float> values(data.size() / 4);
  for (float& v : values) v = cur.f32("float32 samples");
  return values;
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
  std::ostringstream out;
  out << "iteration,L_DC,L_TV,L_tot,lr_inr,lr_poly,seconds\n";
  for (const TrainHistory::Row& row : history.rows) {
    out << row.iteration << ',' << fmt(row.l_dc) << ',' << fmt(row.l_tv) << ','
        << fmt(row.l_tot) << ',' << fmt(row.lr_inr) << ',' << fmt(row.lr_poly) << ','
        << fmt(row.seconds) << '\n';
  }
  write_text(path, out.str());
}

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out << "case,R,ACS,variant,psnr_db,ssim,seconds\n";
  for (const MetricRow& row : rows) {
    const double capped = std::min(row.psnr_db, 999.0);  // +inf sentinel cap
    out << row.case_id << ',' << row.r << ',' << row.acs << ',' << row.variant << ','
        << fmt(capped) << ',' << fmt(row.ssim) << ',' << fmt(row.seconds) << '\n';
  }
  write_text(path, out.str());
}

void write_trace_csv(const std::string& path, const TuneTrace& trace) {
  std::ostringstream out;
  out << "iter,w0,lambda,score\n";
  for (size_t i = 0; i < trace.entries.size(); ++i) {
    const TuneTrace::Entry& e = trace.entries[i];
    out << (i + 1) << ',' << fmt(e.point.w0) << ',' << fmt(e.point.lambda) << ','
        << fmt(e.score) << '\n';
  }
  write_text(path, out.str());
}

}  // namespace sirec
