// Coordinate networks and sensitivity polynomials: initialization
// distributions, forward-pass semantics against manual oracles, parameter
// counts, and the graph/tape-free evaluation agreement.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "core/coil.hpp"
#include "core/coords.hpp"
#include "core/errors.hpp"
#include "core/inr.hpp"
#include "core/tape.hpp"

using namespace sirec;

TEST_CASE("make_arch lays out [input, hidden..., 1]") {
  CHECK(make_arch(2, 6, 256) == std::vector<int64_t>{2, 256, 256, 256, 256, 256, 256, 1});
  CHECK(make_arch(24, 2, 32) == std::vector<int64_t>{24, 32, 32, 1});
  CHECK_THROWS_AS(make_arch(0, 6, 256), Error);
  CHECK_THROWS_AS(make_arch(2, 0, 256), Error);
}

TEST_CASE("sine-net init respects the hard uniform bounds") {
  const InrParameters p = init_siren(make_arch(2, 6, 256), 31.0, 42);
  REQUIRE(p.real_branch.size() == 7);
  REQUIRE(p.imag_branch.size() == 7);

  for (const auto* branch : {&p.real_branch, &p.imag_branch}) {
    // First layer: fan-in 2, |w| <= w0 / 2 = 15.5.
    for (double w : (*branch)[0].w.vec()) CHECK(std::abs(w) <= 15.5);
    // Deeper layers: fan-in 256, |w| <= sqrt(6/256).
    const double bound = std::sqrt(6.0 / 256.0);
    for (size_t l = 1; l < branch->size(); ++l)
      for (double w : (*branch)[l].w.vec()) CHECK(std::abs(w) <= bound);
    // Every bias starts at zero.
    for (const Layer& layer : *branch)
      for (double b : layer.b.vec()) CHECK(b == 0.0);
  }

  // First-layer weights actually use the full +-15.5 range (w0 scaling is
  // applied): with 512 draws per branch the max should clear 1/n = 0.5 by far.
  double widest = 0.0;
  for (double w : p.real_branch[0].w.vec()) widest = std::max(widest, std::abs(w));
  CHECK(widest > 1.0);

  CHECK(p.activation == Activation::sine);
  CHECK(p.w0 == 31.0);
}

TEST_CASE("sine-net init is bit-identical for equal seeds, differs otherwise") {
  const auto arch = make_arch(2, 2, 16);
  const InrParameters a = init_siren(arch, 30.0, 7);
  const InrParameters b = init_siren(arch, 30.0, 7);
  const InrParameters c = init_siren(arch, 30.0, 8);
  for (size_t l = 0; l < a.real_branch.size(); ++l) {
    CHECK(a.real_branch[l].w.vec() == b.real_branch[l].w.vec());
    CHECK(a.imag_branch[l].w.vec() == b.imag_branch[l].w.vec());
  }
  CHECK(a.real_branch[0].w.vec() != c.real_branch[0].w.vec());
  // The two branches are independent parameter sets, not shared.
  CHECK(a.real_branch[0].w.vec() != a.imag_branch[0].w.vec());
}

TEST_CASE("relu-net init uses the He-style bound on every layer") {
  const auto arch = make_arch(24, 3, 64);
  const InrParameters p = init_relu_mlp(arch, 5);
  CHECK(p.activation == Activation::relu);
  for (const auto* branch : {&p.real_branch, &p.imag_branch}) {
    for (size_t l = 0; l < branch->size(); ++l) {
      const int64_t fan_in = (*branch)[l].w.shape()[1];
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (double w : (*branch)[l].w.vec()) {
        CHECK(std::isfinite(w));
        CHECK(std::abs(w) <= bound);
      }
      for (double b : (*branch)[l].b.vec()) CHECK(b == 0.0);
    }
  }
}

TEST_CASE("default network has 329985 trainable values per branch") {
  // (2*256 + 256) + 5*(256*256 + 256) + (256*1 + 1), i.e. seven weight layers
  // for the 2 -> 256 x6 -> 1 stack.
  const InrParameters p = init_siren(make_arch(2, 6, 256), 30.0, 1);
  CHECK(branch_param_count(p.real_branch) == 329985);
  CHECK(branch_param_count(p.imag_branch) == 329985);
}

TEST_CASE("all-zero parameters produce the all-zero image") {
  InrParameters p = init_siren(make_arch(2, 2, 8), 30.0, 3);
  for (auto* branch : {&p.real_branch, &p.imag_branch})
    for (Layer& l : *branch) {
      l.w.fill(0.0);
      l.b.fill(0.0);
    }
  const CoordinateGrid g = make_grid(4, 4);
  const ComplexImage img = eval_image_plain(p, g.coords, 4, 4);
  for (const auto& z : img.v) CHECK(z == std::complex<double>(0.0, 0.0));
}

TEST_CASE("single affine layer with picked weights copies coordinates through") {
  // Real branch reads the x coordinate, imaginary branch the y coordinate.
  InrParameters p;
  p.activation = Activation::sine;  // irrelevant: final layers skip activation
  Layer real_layer{Tensor<double>({1, 2}), Tensor<double>({1})};
  real_layer.w[0] = 1.0;
  real_layer.w[1] = 0.0;
  Layer imag_layer{Tensor<double>({1, 2}), Tensor<double>({1})};
  imag_layer.w[0] = 0.0;
  imag_layer.w[1] = 1.0;
  p.real_branch = {real_layer};
  p.imag_branch = {imag_layer};

  const CoordinateGrid g = make_grid(3, 5);
  const ComplexImage img = eval_image_plain(p, g.coords, 3, 5);
  for (int64_t k = 0; k < 15; ++k) {
    CHECK(img.v[k].real() == g.coords[k * 2 + 0]);
    CHECK(img.v[k].imag() == g.coords[k * 2 + 1]);
  }
}

TEST_CASE("sine net forward matches a manual layer-by-layer evaluation") {
  const auto arch = make_arch(2, 2, 5);
  const InrParameters p = init_siren(arch, 25.0, 11);
  const CoordinateGrid g = make_grid(4, 3);
  const ComplexImage img = eval_image_plain(p, g.coords, 4, 3);

  for (int64_t k = 0; k < 12; ++k) {
    for (int part = 0; part < 2; ++part) {
      const auto& branch = part == 0 ? p.real_branch : p.imag_branch;
      std::vector<double> h{g.coords[k * 2], g.coords[k * 2 + 1]};
      for (size_t l = 0; l < branch.size(); ++l) {
        const auto& w = branch[l].w;
        const int64_t out = w.shape()[0], in = w.shape()[1];
        std::vector<double> next(static_cast<size_t>(out));
        for (int64_t o = 0; o < out; ++o) {
          double acc = branch[l].b[o];
          for (int64_t i = 0; i < in; ++i) acc += w[o * in + i] * h[static_cast<size_t>(i)];
          next[static_cast<size_t>(o)] = l + 1 < branch.size() ? std::sin(acc) : acc;
        }
        h = std::move(next);
      }
      const double got = part == 0 ? img.v[k].real() : img.v[k].imag();
      CHECK(got == doctest::Approx(h[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("relu variant clamps negatives in hidden layers") {
  const auto arch = make_arch(2, 1, 4);
  InrParameters p = init_relu_mlp(arch, 2);
  // Force a known hidden pre-activation: w1 = [[1,0],[-1,0],[0,1],[0,-1]],
  // output layer sums all hidden units.
  p.real_branch[0].w.fill(0.0);
  p.real_branch[0].w[0] = 1.0;   // h0 = x
  p.real_branch[0].w[2] = -1.0;  // h1 = -x
  p.real_branch[0].w[5] = 1.0;   // h2 = y
  p.real_branch[0].w[7] = -1.0;  // h3 = -y
  p.real_branch[1].w.fill(1.0);
  p.imag_branch = p.real_branch;

  const CoordinateGrid g = make_grid(3, 3);
  const ComplexImage img = eval_image_plain(p, g.coords, 3, 3);
  for (int64_t k = 0; k < 9; ++k) {
    const double x = g.coords[k * 2], y = g.coords[k * 2 + 1];
    const double want = std::max(x, 0.0) + std::max(-x, 0.0) + std::max(y, 0.0) +
                        std::max(-y, 0.0);  // |x| + |y|
    CHECK(img.v[k].real() == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("tape graph and plain evaluation agree bit-for-bit in double") {
  const auto arch = make_arch(2, 3, 16);
  const InrParameters p = init_siren(arch, 28.0, 9);
  const CoordinateGrid g = make_grid(8, 6);

  ad::Tape<double> tape;
  const ImageGraph graph = eval_image(tape, p, g.coords, 8, 6);
  const ComplexImage plain = eval_image_plain(p, g.coords, 8, 6);
  for (int64_t k = 0; k < 48; ++k) {
    CHECK(tape.value(graph.image.re)[k] == plain.v[k].real());
    CHECK(tape.value(graph.image.im)[k] == plain.v[k].imag());
  }
  // Leaves come out in a stable order: both branches, weight then bias.
  CHECK(graph.leaves.size() == 2 * 2 * arch.size() - 4);  // 2 branches * 4 layers * 2
}

TEST_CASE("image graph gradients flow to every network leaf") {
  const auto arch = make_arch(2, 1, 6);
  const InrParameters p = init_siren(arch, 20.0, 13);
  const CoordinateGrid g = make_grid(5, 5);
  ad::Tape<double> tape;
  const ImageGraph graph = eval_image(tape, p, g.coords, 5, 5);
  // Shifted sum of squares: smooth (no L1 kink near zero outputs) and not odd
  // in the parameters (zero-bias sine nets are odd functions on this
  // sign-symmetric grid, which would make every bias gradient exactly zero).
  auto shift = tape.constant(Tensor<double>({5, 5}, 0.7));
  auto re = tape.add(graph.image.re, shift);
  auto im = tape.sub(graph.image.im, shift);
  auto loss = tape.add(tape.l1_sum(tape.mul(re, re)), tape.l1_sum(tape.mul(im, im)));
  auto entries = ad::sample_leaf_entries(tape, tape.leaves(), 30, 17);
  const ad::FdReport rep = ad::finite_difference_check(tape, loss, entries, 1e-6);
  CHECK(rep.checked == 30);
  INFO("worst ", rep.worst_leaf, "[", rep.worst_index, "] analytic ", rep.worst_analytic,
       " numeric ", rep.worst_numeric);
  CHECK(rep.max_rel_err <= 1e-5);
}

TEST_CASE("eval_image rejects input width that does not match the first layer") {
  const InrParameters p = init_siren(make_arch(4, 1, 4), 30.0, 1);
  const CoordinateGrid g = make_grid(3, 3);  // width 2, net expects 4
  ad::Tape<double> tape;
  CHECK_THROWS_WITH_AS(eval_image(tape, p, g.coords, 3, 3), doctest::Contains("fan-in"),
                       Error);
}

// ---------------------------------------------------------------------------
// Sensitivity polynomials
// ---------------------------------------------------------------------------

TEST_CASE("poly init: determinism, shape, and the 2*c*(N+1)^2 coefficient count") {
  const PolyCoefficients a = init_poly(8, 15, 3);
  const PolyCoefficients b = init_poly(8, 15, 3);
  CHECK(a.coeffs.vec() == b.coeffs.vec());
  CHECK(a.terms() == 256);
  CHECK(a.coeffs.numel() == 2 * 8 * 256);
  CHECK(a.coeffs.shape() == Shape{8, 2, 16, 16});

  const PolyCoefficients c = init_poly(8, 15, 4);
  CHECK(a.coeffs.vec() != c.coeffs.vec());
}

TEST_CASE("poly init draws from Normal(0, 1/(N+1)^2)") {
  const int64_t order = 15;
  const PolyCoefficients pc = init_poly(32, order, 7);  // 16384 samples
  double sum = 0.0, sumsq = 0.0;
  for (double v : pc.coeffs.vec()) {
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(pc.coeffs.numel());
  const double mean = sum / n;
  const double std = std::sqrt(sumsq / n - mean * mean);
  const double want = 1.0 / static_cast<double>(order + 1);
  CHECK(std == doctest::Approx(want).epsilon(0.10));
  CHECK(std::abs(mean) < 0.1 * want);
}

TEST_CASE("monomial basis: ones column, exact powers, magnitude bound") {
  const CoordinateGrid g = make_grid(9, 9);  // ticks at multiples of 1/4
  const int64_t order = 4;
  const MonomialBasis mb = build_basis(g, order);
  const int64_t terms = (order + 1) * (order + 1);
  CHECK(mb.basis.shape() == Shape{81, terms});

  for (int64_t k = 0; k < 81; ++k) {
    const double x = g.coords[k * 2], y = g.coords[k * 2 + 1];
    for (int64_t p = 0; p <= order; ++p) {
      for (int64_t q = 0; q <= order; ++q) {
        const double got = mb.basis[k * terms + p * (order + 1) + q];
        CHECK(got == doctest::Approx(std::pow(x, p) * std::pow(y, q)).epsilon(1e-14));
        CHECK(std::abs(got) <= 1.0 + 1e-15);
      }
    }
  }

  // The (0,0) column is exactly one everywhere.
  for (int64_t k = 0; k < 81; ++k) CHECK(mb.basis[k * terms] == 1.0);

  // Spot values from the operation contract: corner (1,-1) at (p,q)=(3,2)
  // and midpoint (0.5, 0.5) at (p,q)=(2,1).
  const int64_t corner = 8 * 9 + 0;  // x=1, y=-1
  CHECK(mb.basis[corner * terms + 3 * 5 + 2] == 1.0);
  const int64_t mid = 6 * 9 + 6;  // x=0.5, y=0.5
  CHECK(mb.basis[mid * terms + 2 * 5 + 1] == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("sensitivity maps equal the explicit polynomial sum") {
  const int64_t coils = 3, order = 2, d1 = 5, d2 = 4;
  const PolyCoefficients pc = init_poly(coils, order, 21);
  const CoordinateGrid g = make_grid(d1, d2);
  const MonomialBasis mb = build_basis(g, order);
  const SensitivityField field = eval_sensitivities_plain(pc, mb, d1, d2);
  CHECK(field.coils == coils);

  for (int64_t j = 0; j < coils; ++j) {
    for (int64_t k = 0; k < d1 * d2; ++k) {
      const double x = g.coords[k * 2], y = g.coords[k * 2 + 1];
      std::complex<double> want = 0.0;
      for (int64_t p = 0; p <= order; ++p)
        for (int64_t q = 0; q <= order; ++q)
          want += std::complex<double>(pc.at(j, 0, p, q), pc.at(j, 1, p, q)) *
                  std::pow(x, p) * std::pow(y, q);
      CHECK(field.v[j * d1 * d2 + k].real() == doctest::Approx(want.real()).epsilon(1e-12));
      CHECK(field.v[j * d1 * d2 + k].imag() == doctest::Approx(want.imag()).epsilon(1e-12));
    }
  }
}

TEST_CASE("taped sensitivities match the plain path and are differentiable") {
  const int64_t coils = 2, order = 3, d1 = 6, d2 = 6;
  const PolyCoefficients pc = init_poly(coils, order, 31);
  const MonomialBasis mb = build_basis(make_grid(d1, d2), order);

  ad::Tape<double> tape;
  const SensGraph sg = eval_sensitivities(tape, pc, mb, d1, d2);
  REQUIRE(sg.maps.size() == 2);
  CHECK(sg.leaves.size() == 4);  // per coil: real-part and imag-part vectors

  const SensitivityField plain = eval_sensitivities_plain(pc, mb, d1, d2);
  for (int64_t j = 0; j < coils; ++j) {
    for (int64_t k = 0; k < d1 * d2; ++k) {
      CHECK(tape.value(sg.maps[j].re)[k] == plain.v[j * d1 * d2 + k].real());
      CHECK(tape.value(sg.maps[j].im)[k] == plain.v[j * d1 * d2 + k].imag());
    }
  }

  auto loss = tape.l1_sum(tape.add(sg.maps[0].re, sg.maps[1].im));
  auto entries = ad::sample_leaf_entries(tape, tape.leaves(), 24, 5);
  const ad::FdReport rep = ad::finite_difference_check(tape, loss, entries, 1e-6);
  CHECK(rep.max_rel_err <= 1e-5);
}

TEST_CASE("eval_sensitivities rejects a basis built for a different order") {
  const PolyCoefficients pc = init_poly(2, 3, 1);
  const MonomialBasis mb = build_basis(make_grid(4, 4), 5);
  ad::Tape<double> tape;
  CHECK_THROWS_AS(eval_sensitivities(tape, pc, mb, 4, 4), Error);
  CHECK_THROWS_AS(eval_sensitivities_plain(pc, mb, 4, 4), Error);
  const MonomialBasis right_order = build_basis(make_grid(5, 5), 3);
  CHECK_THROWS_AS(eval_sensitivities_plain(pc, right_order, 4, 4), Error);  // rows off
}

TEST_CASE("normalize_maps yields unit root-sum-of-squares per pixel") {
  const int64_t coils = 4, d1 = 5, d2 = 5;
  const PolyCoefficients pc = init_poly(coils, 4, 17);
  const MonomialBasis mb = build_basis(make_grid(d1, d2), 4);
  const SensitivityField field = eval_sensitivities_plain(pc, mb, d1, d2);
  const NormalizedMaps nm = normalize_maps(field);
  CHECK(nm.degenerate_pixels == 0);
  for (int64_t k = 0; k < d1 * d2; ++k) {
    double rss = 0.0;
    for (int64_t j = 0; j < coils; ++j) rss += std::norm(nm.field.v[j * d1 * d2 + k]);
    CHECK(std::sqrt(rss) == doctest::Approx(1.0).epsilon(1e-12));
    // Direction preserved: normalized value is a positive real multiple.
    const std::complex<double> ratio =
        nm.field.v[k] / field.v[k];
    CHECK(ratio.imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ratio.real() > 0.0);
  }
}

TEST_CASE("normalize_maps passes exactly-zero coil vectors through") {
  SensitivityField field(2, 2, 2);
  field.at(0, 0, 0) = {3.0, 0.0};
  field.at(1, 0, 0) = {0.0, 4.0};
  // Pixel (0,1) left all-zero across coils; pixels (1,0) and (1,1) get values.
  field.at(0, 1, 0) = {1.0, 1.0};
  field.at(0, 1, 1) = {0.0, -2.0};
  const NormalizedMaps nm = normalize_maps(field);
  CHECK(nm.degenerate_pixels == 1);
  CHECK(nm.field.at(0, 0, 1) == std::complex<double>(0.0, 0.0));
  CHECK(nm.field.at(1, 0, 1) == std::complex<double>(0.0, 0.0));
  CHECK(std::abs(nm.field.at(0, 0, 0)) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(std::abs(nm.field.at(1, 0, 0)) == doctest::Approx(0.8).epsilon(1e-14));
}
