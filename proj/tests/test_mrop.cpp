// Acquisition operator: unitary transforms (including awkward radices),
// masked forward model against a direct-DFT oracle, the adjoint identity,
// and the inference-time k-space replacement.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "core/errors.hpp"
#include "core/mrop.hpp"
#include "core/rng.hpp"
#include "core/tape.hpp"
#include "core/types.hpp"

using namespace sirec;

namespace {

ComplexImage random_image(int64_t d1, int64_t d2, Rng& rng) {
  ComplexImage img(d1, d2);
  for (auto& z : img.v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return img;
}

SensitivityField random_sens(int64_t coils, int64_t d1, int64_t d2, Rng& rng) {
  SensitivityField s(coils, d1, d2);
  for (auto& z : s.v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return s;
}

SamplingMask mask_of(int64_t d1, int64_t d2, std::vector<int64_t> kept_centered) {
  SamplingMask m;
  m.d1 = d1;
  m.d2 = d2;
  m.kept_centered = std::move(kept_centered);
  return m;
}

SamplingMask full_mask(int64_t d1, int64_t d2) {
  std::vector<int64_t> all(static_cast<size_t>(d2));
  for (int64_t u = 0; u < d2; ++u) all[static_cast<size_t>(u)] = u;
  return mask_of(d1, d2, std::move(all));
}

double max_abs_diff(const std::vector<std::complex<double>>& a,
                    const std::vector<std::complex<double>>& b) {
  double worst = 0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::complex<double> direct_dft_entry(const ComplexImage& img, int64_t k1, int64_t k2) {
  std::complex<double> acc = 0;
  for (int64_t n1 = 0; n1 < img.d1; ++n1) {
    for (int64_t n2 = 0; n2 < img.d2; ++n2) {
      const double ang =
          -2.0 * std::numbers::pi *
          (static_cast<double>(k1 * n1) / static_cast<double>(img.d1) +
           static_cast<double>(k2 * n2) / static_cast<double>(img.d2));
      acc += img.at(n1, n2) * std::polar(1.0, ang);
    }
  }
  return acc / std::sqrt(static_cast<double>(img.d1 * img.d2));
}

}  // namespace

TEST_CASE("centered/standard index conversion round-trips and centers DC") {
  for (int64_t n : {4, 5, 236, 368}) {
    for (int64_t c = 0; c < n; ++c) CHECK(standard_to_centered(centered_to_standard(c, n), n) == c);
    // DC (standard index 0) sits at the center bin floor(n/2).
    CHECK(standard_to_centered(0, n) == n / 2);
    CHECK(centered_to_standard(n / 2, n) == 0);
  }
}

TEST_CASE("fft2_plain is unitary at power-of-two and awkward radices") {
  Rng rng(31);
  for (auto [d1, d2] : {std::pair<int64_t, int64_t>{16, 16}, {12, 10}, {59, 6}, {23, 47}}) {
    const ComplexImage img = random_image(d1, d2, rng);
    const ComplexImage spec = fft2_plain(img);
    double in2 = 0, out2 = 0;
    for (const auto& z : img.v) in2 += std::norm(z);
    for (const auto& z : spec.v) out2 += std::norm(z);
    CHECK(std::abs(out2 - in2) <= 1e-12 * in2);

    const ComplexImage back = ifft2_plain(spec);
    CHECK(max_abs_diff(back.v, img.v) <= 1e-12);
  }
}

TEST_CASE("fft2_plain agrees with the direct DFT at spot frequencies") {
  Rng rng(32);
  const ComplexImage img = random_image(9, 7, rng);
  const ComplexImage spec = fft2_plain(img);
  for (auto [k1, k2] : {std::pair<int64_t, int64_t>{0, 0}, {1, 0}, {0, 1}, {4, 3}, {8, 6}}) {
    const std::complex<double> want = direct_dft_entry(img, k1, k2);
    CHECK(std::abs(spec.at(k1, k2) - want) <= 1e-12);
  }
}

TEST_CASE("forward model with unit sensitivities and a full mask is the FFT") {
  Rng rng(33);
  const int64_t d1 = 8, d2 = 8;
  const ComplexImage img = random_image(d1, d2, rng);
  SensitivityField ones(1, d1, d2);
  for (auto& z : ones.v) z = {1.0, 0.0};
  const KSpaceVolume vol = forward_model_plain(img, ones, full_mask(d1, d2));
  const ComplexImage spec = fft2_plain(img);
  CHECK(max_abs_diff(vol.v, spec.v) == 0.0);  // same arithmetic path
}

TEST_CASE("forward model of the zero image is zero") {
  Rng rng(34);
  const ComplexImage zero(6, 6);
  const SensitivityField sens = random_sens(3, 6, 6, rng);
  const KSpaceVolume vol = forward_model_plain(zero, sens, mask_of(6, 6, {1, 3, 5}));
  for (const auto& z : vol.v) CHECK(z == std::complex<double>(0.0, 0.0));
}

TEST_CASE("single kept line matches the direct DFT restricted to that line") {
  Rng rng(35);
  const int64_t d1 = 7, d2 = 6;
  const ComplexImage img = random_image(d1, d2, rng);
  const SensitivityField sens = random_sens(1, d1, d2, rng);
  const int64_t kept_c = 4;  // centered index
  const KSpaceVolume vol = forward_model_plain(img, sens, mask_of(d1, d2, {kept_c}));

  ComplexImage weighted(d1, d2);
  for (int64_t k = 0; k < d1 * d2; ++k) weighted.v[k] = sens.v[k] * img.v[k];
  const int64_t u = centered_to_standard(kept_c, d2);
  for (int64_t k1 = 0; k1 < d1; ++k1) {
    CHECK(std::abs(vol.at(0, k1, u) - direct_dft_entry(weighted, k1, u)) <= 1e-10);
  }
  // Everything off the kept line is exactly zero.
  for (int64_t k1 = 0; k1 < d1; ++k1)
    for (int64_t k2 = 0; k2 < d2; ++k2)
      if (k2 != u) CHECK(vol.at(0, k1, k2) == std::complex<double>(0.0, 0.0));
}

TEST_CASE("taped forward model matches the plain evaluation to the last digits") {
  Rng rng(36);
  const int64_t coils = 3, d1 = 8, d2 = 6;
  const ComplexImage img = random_image(d1, d2, rng);
  const SensitivityField sens = random_sens(coils, d1, d2, rng);
  const SamplingMask mask = mask_of(d1, d2, {0, 2, 3, 5});

  ad::Tape<double> tape;
  Tensor<double> ire({d1, d2}), iim({d1, d2});
  for (int64_t k = 0; k < d1 * d2; ++k) {
    ire[k] = img.v[k].real();
    iim[k] = img.v[k].imag();
  }
  const ad::ComplexRef img_ref{tape.leaf(ire, "re"), tape.leaf(iim, "im")};
  std::vector<ad::ComplexRef> sens_refs;
  for (int64_t j = 0; j < coils; ++j) {
    Tensor<double> sre({d1, d2}), sim({d1, d2});
    for (int64_t k = 0; k < d1 * d2; ++k) {
      sre[k] = sens.v[j * d1 * d2 + k].real();
      sim[k] = sens.v[j * d1 * d2 + k].imag();
    }
    sens_refs.push_back({tape.constant(sre), tape.constant(sim)});
  }
  const KspaceGraph graph = forward_model(tape, img_ref, sens_refs, mask);
  REQUIRE(graph.coils.size() == static_cast<size_t>(coils));

  // The tape multiplies through four explicit real products while the plain
  // path uses std::complex arithmetic, so agreement is to rounding (the
  // compiler may contract one of them), not bit-exact.
  const KSpaceVolume plain = forward_model_plain(img, sens, mask);
  for (int64_t j = 0; j < coils; ++j) {
    for (int64_t k = 0; k < d1 * d2; ++k) {
      CHECK(std::abs(tape.value(graph.coils[j].re)[k] - plain.v[j * d1 * d2 + k].real()) <=
            1e-13);
      CHECK(std::abs(tape.value(graph.coils[j].im)[k] - plain.v[j * d1 * d2 + k].imag()) <=
            1e-13);
    }
  }
  CHECK(plain.mask.same_pattern(mask));
}

TEST_CASE("forward model rejects a sensitivity/mask coil or shape mismatch") {
  Rng rng(37);
  const ComplexImage img = random_image(4, 4, rng);
  const SensitivityField sens = random_sens(2, 4, 6, rng);  // wrong d2
  CHECK_THROWS_AS(forward_model_plain(img, sens, mask_of(4, 4, {0})), Error);
  const SensitivityField none(0, 4, 4);
  CHECK_THROWS_AS(forward_model_plain(img, none, mask_of(4, 4, {0})), Error);
}

TEST_CASE("adjoint with unit sensitivity and full mask is the inverse FFT") {
  Rng rng(38);
  const int64_t d1 = 6, d2 = 6;
  KSpaceVolume vol(1, d1, d2);
  vol.mask = full_mask(d1, d2);
  ComplexImage as_img(d1, d2);
  for (int64_t k = 0; k < d1 * d2; ++k) {
    vol.v[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    as_img.v[k] = vol.v[k];
  }
  SensitivityField ones(1, d1, d2);
  for (auto& z : ones.v) z = {1.0, 0.0};
  const ComplexImage got = adjoint_model(vol, ones);
  const ComplexImage want = ifft2_plain(as_img);
  CHECK(max_abs_diff(got.v, want.v) <= 1e-14);
}

TEST_CASE("adjoint of zero k-space is the zero image") {
  Rng rng(39);
  KSpaceVolume vol(2, 5, 5);
  vol.mask = mask_of(5, 5, {1, 2});
  const ComplexImage img = adjoint_model(vol, random_sens(2, 5, 5, rng));
  for (const auto& z : img.v) CHECK(z == std::complex<double>(0.0, 0.0));
}

TEST_CASE("adjoint identity <Ex, y> = <x, E^H y> within 1e-10") {
  Rng rng(40);
  const int64_t coils = 4, d1 = 10, d2 = 9;
  const ComplexImage x = random_image(d1, d2, rng);
  const SensitivityField sens = random_sens(coils, d1, d2, rng);
  const SamplingMask mask = mask_of(d1, d2, {0, 1, 4, 6, 8});

  const KSpaceVolume ex = forward_model_plain(x, sens, mask);
  KSpaceVolume y(coils, d1, d2);
  y.mask = mask;
  for (auto& z : y.v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  const ComplexImage ehy = adjoint_model(y, sens);

  std::complex<double> lhs = 0, rhs = 0;
  for (size_t i = 0; i < ex.v.size(); ++i) lhs += ex.v[i] * std::conj(y.v[i]);
  for (int64_t k = 0; k < d1 * d2; ++k) rhs += x.v[k] * std::conj(ehy.v[k]);
  CHECK(std::abs(lhs - rhs) <= 1e-10);
}

TEST_CASE("mask application is an idempotent projection, bit-exactly") {
  Rng rng(41);
  KSpaceVolume vol(2, 8, 8);
  vol.mask = mask_of(8, 8, {0, 3, 4, 7});
  for (auto& z : vol.v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  apply_mask(vol);
  const std::vector<std::complex<double>> once = vol.v;
  apply_mask(vol);
  CHECK(vol.v == once);
  // Unsampled lines really are zero; kept lines untouched by the projection.
  for (int64_t j = 0; j < 2; ++j)
    for (int64_t k1 = 0; k1 < 8; ++k1)
      for (int64_t u = 0; u < 8; ++u)
        if (!vol.mask.kept_std(u)) CHECK(vol.at(j, k1, u) == std::complex<double>(0.0, 0.0));
}

TEST_CASE("k-space consistency keeps measurements bit-exactly, predictions elsewhere") {
  Rng rng(42);
  const int64_t coils = 2, d1 = 6, d2 = 8;
  const SamplingMask mask = mask_of(d1, d2, {2, 4, 5});

  KSpaceVolume predicted(coils, d1, d2), measured(coils, d1, d2);
  predicted.mask = mask;
  measured.mask = mask;
  for (auto& z : predicted.v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  for (auto& z : measured.v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  apply_mask(measured);

  const KSpaceVolume blend = kspace_consistency(predicted, measured);
  for (int64_t j = 0; j < coils; ++j) {
    for (int64_t k1 = 0; k1 < d1; ++k1) {
      for (int64_t u = 0; u < d2; ++u) {
        const std::complex<double> want =
            mask.kept_std(u) ? measured.at(j, k1, u) : predicted.at(j, k1, u);
        CHECK(blend.at(j, k1, u) == want);  // bit-exact either way
      }
    }
  }

  // Idempotent under fixed measurements.
  const KSpaceVolume twice = kspace_consistency(blend, measured);
  CHECK(twice.v == blend.v);
}

TEST_CASE("k-space consistency degenerate masks: full replaces all, empty none") {
  Rng rng(43);
  const int64_t d1 = 4, d2 = 4;
  KSpaceVolume predicted(1, d1, d2), measured(1, d1, d2);
  for (auto& z : predicted.v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  for (auto& z : measured.v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

  predicted.mask = full_mask(d1, d2);
  measured.mask = predicted.mask;
  CHECK(kspace_consistency(predicted, measured).v == measured.v);

  predicted.mask = mask_of(d1, d2, {});
  KSpaceVolume empty_measured(1, d1, d2);
  empty_measured.mask = predicted.mask;
  CHECK(kspace_consistency(predicted, empty_measured).v == predicted.v);
}

TEST_CASE("k-space consistency rejects mismatched masks or shapes") {
  KSpaceVolume a(1, 4, 4), b(1, 4, 4);
  a.mask = mask_of(4, 4, {0, 1});
  b.mask = mask_of(4, 4, {0, 2});
  CHECK_THROWS_AS(kspace_consistency(a, b), Error);
  KSpaceVolume c(2, 4, 4);
  c.mask = a.mask;
  CHECK_THROWS_AS(kspace_consistency(a, c), Error);
}

TEST_CASE("forward model gradients pass a finite-difference check") {
  Rng rng(44);
  const int64_t d1 = 6, d2 = 5;
  Tensor<double> ire({d1, d2}), iim({d1, d2}), sre({d1, d2}), sim({d1, d2});
  for (int64_t k = 0; k < d1 * d2; ++k) {
    ire[k] = rng.uniform(-1, 1);
    iim[k] = rng.uniform(-1, 1);
    sre[k] = rng.uniform(-1, 1);
    sim[k] = rng.uniform(-1, 1);
  }
  ad::Tape<double> tape;
  const ad::ComplexRef img{tape.leaf(ire, "ire"), tape.leaf(iim, "iim")};
  const std::vector<ad::ComplexRef> sens{{tape.leaf(sre, "sre"), tape.leaf(sim, "sim")}};
  const KspaceGraph graph = forward_model(tape, img, sens, mask_of(d1, d2, {0, 2, 4}));

  // Smooth surrogate of the data term: sum of squared entries.
  auto sq = tape.add(tape.mul(graph.coils[0].re, graph.coils[0].re),
                     tape.mul(graph.coils[0].im, graph.coils[0].im));
  auto loss = tape.l1_sum(sq);
  auto entries = ad::sample_leaf_entries(tape, tape.leaves(), 32, 3);
  const ad::FdReport rep = ad::finite_difference_check(tape, loss, entries, 1e-6);
  INFO("worst ", rep.worst_leaf, "[", rep.worst_index, "] analytic ", rep.worst_analytic,
       " numeric ", rep.worst_numeric);
  CHECK(rep.max_rel_err <= 1e-5);
}
