#include "core/mrop.hpp"

#include <memory>

#include "core/fft.hpp"

namespace sirec {
namespace {

void split(const ComplexImage& img, std::vector<double>& re, std::vector<double>& im) {
  const size_t n = img.v.size();
  re.resize(n);
  im.resize(n);
  for (size_t i = 0; i < n; ++i) {
    re[i] = img.v[i].real();
    im[i] = img.v[i].imag();
  }
}

ComplexImage join(int64_t d1, int64_t d2, const std::vector<double>& re,
                  const std::vector<double>& im) {
  ComplexImage out(d1, d2);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = {re[i], im[i]};
  return out;
}

}  // namespace

template <typename T>
KspaceGraph forward_model(ad::Tape<T>& tape, const ad::ComplexRef& image,
                          const std::vector<ad::ComplexRef>& sens, const SamplingMask& mask) {
  require(!sens.empty(), ErrCode::invalid_argument, "forward_model: no sensitivity maps");
  const Shape& is = tape.value(image.re).shape();
  require(is.size() == 2 && is[0] == mask.d1 && is[1] == mask.d2, ErrCode::invalid_argument,
          "forward_model: image " + shape_str(is) + " does not match mask " +
              std::to_string(mask.d1) + "x" + std::to_string(mask.d2));

  auto mask01 = std::make_shared<const Tensor<T>>(mask.template matrix<T>());
  KspaceGraph g;
  g.coils.reserve(sens.size());
  for (const ad::ComplexRef& c : sens) {
    ad::ComplexRef weighted = complex_mul(tape, c, image);
    ad::ComplexRef k = tape.fft2(weighted);
    g.coils.push_back({tape.mask_select(k.re, mask01), tape.mask_select(k.im, mask01)});
  }
  return g;
}

template KspaceGraph forward_model(ad::Tape<float>&, const ad::ComplexRef&,
                                   const std::vector<ad::ComplexRef>&, const SamplingMask&);
template KspaceGraph forward_model(ad::Tape<double>&, const ad::ComplexRef&,
                                   const std::vector<ad::ComplexRef>&, const SamplingMask&);

ComplexImage fft2_plain(const ComplexImage& img) {
  std::vector<double> re, im, ro(img.v.size()), io(img.v.size());
  split(img, re, im);
  fft::fft2(img.d1, img.d2, re.data(), im.data(), ro.data(), io.data());
  return join(img.d1, img.d2, ro, io);
}

ComplexImage ifft2_plain(const ComplexImage& img) {
  std::vector<double> re, im, ro(img.v.size()), io(img.v.size());
  split(img, re, im);
  fft::ifft2(img.d1, img.d2, re.data(), im.data(), ro.data(), io.data());
  return join(img.d1, img.d2, ro, io);
}

KSpaceVolume forward_model_plain(const ComplexImage& image, const SensitivityField& sens,
                                 const SamplingMask& mask) {
  require(sens.coils >= 1, ErrCode::invalid_argument, "forward_model_plain: no sensitivity maps");
  require(sens.d1 == image.d1 && sens.d2 == image.d2, ErrCode::invalid_argument,
          "forward_model_plain: sensitivity grid does not match image");
  require(mask.d1 == image.d1 && mask.d2 == image.d2, ErrCode::invalid_argument,
          "forward_model_plain: mask does not match image");
  KSpaceVolume ks(sens.coils, image.d1, image.d2);
  ks.mask = mask;
  const int64_t pixels = image.numel();
  ComplexImage weighted(image.d1, image.d2);
  for (int64_t j = 0; j < sens.coils; ++j) {
    for (int64_t k = 0; k < pixels; ++k) weighted.v[k] = sens.v[j * pixels + k] * image.v[k];
    ComplexImage f = fft2_plain(weighted);
    std::copy(f.v.begin(), f.v.end(), ks.v.begin() + j * pixels);
  }
  apply_mask(ks);
  return ks;
}

ComplexImage adjoint_model(const KSpaceVolume& kspace, const SensitivityField& sens) {
  require(sens.coils == kspace.coils && sens.d1 == kspace.d1 && sens.d2 == kspace.d2,
          ErrCode::invalid_argument, "adjoint_model: shape mismatch");
  const int64_t pixels = kspace.d1 * kspace.d2;
  ComplexImage acc(kspace.d1, kspace.d2);
  ComplexImage masked(kspace.d1, kspace.d2);
  for (int64_t j = 0; j < kspace.coils; ++j) {
    for (int64_t i = 0; i < kspace.d1; ++i)
      for (int64_t u = 0; u < kspace.d2; ++u)
        masked.at(i, u) = kspace.mask.kept_std(u) ? kspace.at(j, i, u) : 0.0;
    ComplexImage img = ifft2_plain(masked);
    for (int64_t k = 0; k < pixels; ++k) acc.v[k] += std::conj(sens.v[j * pixels + k]) * img.v[k];
  }
  return acc;
}

void apply_mask(KSpaceVolume& volume) {
  for (int64_t u = 0; u < volume.d2; ++u) {
    if (volume.mask.kept_std(u)) continue;
    for (int64_t j = 0; j < volume.coils; ++j)
      for (int64_t i = 0; i < volume.d1; ++i) volume.at(j, i, u) = 0.0;
  }
}

KSpaceVolume kspace_consistency(const KSpaceVolume& predicted, const KSpaceVolume& measured) {
  require(predicted.coils == measured.coils && predicted.d1 == measured.d1 &&
              predicted.d2 == measured.d2,
          ErrCode::invalid_argument, "kspace_consistency: dimension mismatch");
  require(predicted.mask.same_pattern(measured.mask), ErrCode::invalid_argument,
          "kspace_consistency: masks differ");
  KSpaceVolume out = predicted;
  for (int64_t u = 0; u < out.d2; ++u) {
    if (!measured.mask.kept_std(u)) continue;
    for (int64_t j = 0; j < out.coils; ++j)
      for (int64_t i = 0; i < out.d1; ++i) out.at(j, i, u) = measured.at(j, i, u);
  }
  return out;
}

}  // namespace sirec
