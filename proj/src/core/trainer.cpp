#include "core/trainer.hpp"

#include <chrono>
#include <cmath>

#include "core/coords.hpp"

namespace sirec {

template <typename T>
ad::ValueRef dc_loss(ad::Tape<T>& tape, const KspaceGraph& predicted,
                     const KSpaceVolume& measured) {
  require(static_cast<int64_t>(predicted.coils.size()) == measured.coils,
          ErrCode::invalid_argument,
          "dc_loss: predicted coil count " + std::to_string(predicted.coils.size()) +
              " does not match measured " + std::to_string(measured.coils));
  const int64_t pixels = measured.d1 * measured.d2;
  ad::ValueRef total;
  for (int64_t j = 0; j < measured.coils; ++j) {
    Tensor<T> mre(Shape{measured.d1, measured.d2});
    Tensor<T> mim(Shape{measured.d1, measured.d2});
    for (int64_t k = 0; k < pixels; ++k) {
      mre[k] = static_cast<T>(measured.v[j * pixels + k].real());
      mim[k] = static_cast<T>(measured.v[j * pixels + k].imag());
    }
    const std::string tag = "meas.c" + std::to_string(j);
    ad::ValueRef cre = tape.constant(std::move(mre), tag + ".re");
    ad::ValueRef cim = tape.constant(std::move(mim), tag + ".im");
    ad::ValueRef term = tape.add(tape.l1_sum(tape.sub(cre, predicted.coils[j].re)),
                                 tape.l1_sum(tape.sub(cim, predicted.coils[j].im)));
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

template ad::ValueRef dc_loss(ad::Tape<float>&, const KspaceGraph&, const KSpaceVolume&);
template ad::ValueRef dc_loss(ad::Tape<double>&, const KspaceGraph&, const KSpaceVolume&);

template <typename T>
ad::ValueRef tv_loss(ad::Tape<T>& tape, const ad::ComplexRef& image) {
  const Shape& s = tape.value(image.re).shape();
  require(s.size() == 2 && s[0] >= 2 && s[1] >= 2, ErrCode::invalid_argument,
          "tv_loss: image must be at least 2x2");
  ad::ValueRef re = tape.add(tape.l1_sum(tape.diff_x(image.re)),
                             tape.l1_sum(tape.diff_y(image.re)));
  ad::ValueRef im = tape.add(tape.l1_sum(tape.diff_x(image.im)),
                             tape.l1_sum(tape.diff_y(image.im)));
  return tape.add(re, im);
}

template ad::ValueRef tv_loss(ad::Tape<float>&, const ad::ComplexRef&);
template ad::ValueRef tv_loss(ad::Tape<double>&, const ad::ComplexRef&);

template <typename T>
ad::ValueRef total_loss(ad::Tape<T>& tape, ad::ValueRef dc, ad::ValueRef tv, double lambda,
                        bool use_tv) {
  require(lambda >= 0, ErrCode::invalid_argument, "total_loss: lambda must be non-negative");
  if (!use_tv) return dc;
  return tape.add(dc, tape.scalar_mul(tv, static_cast<T>(lambda)));
}

template ad::ValueRef total_loss(ad::Tape<float>&, ad::ValueRef, ad::ValueRef, double, bool);
template ad::ValueRef total_loss(ad::Tape<double>&, ad::ValueRef, ad::ValueRef, double, bool);

double lr_schedule(double initial, double factor, int64_t every, int64_t t) {
  require(factor > 0 && factor <= 1, ErrCode::invalid_argument,
          "lr_schedule: factor must lie in (0, 1]");
  require(every >= 1 && t >= 0, ErrCode::invalid_argument,
          "lr_schedule: interval must be positive and t non-negative");
  return initial * std::pow(factor, static_cast<double>(t / every));
}

template <typename T>
void adam_step(ad::Tape<T>& tape, std::span<const ad::ValueRef> leaves, AdamState<T>& state,
               double lr, double beta1, double beta2, double eps, int64_t t) {
  require(t >= 1, ErrCode::invalid_argument, "adam_step: step count t must be >= 1");
  if (state.m.empty()) {
    for (ad::ValueRef l : leaves) {
      state.m.emplace_back(tape.value(l).shape());
      state.v.emplace_back(tape.value(l).shape());
    }
  }
  require(state.m.size() == leaves.size(), ErrCode::invalid_argument,
          "adam_step: state does not match leaf set");

  const T b1 = static_cast<T>(beta1), b2 = static_cast<T>(beta2);
  const T one_m_b1 = static_cast<T>(1.0 - beta1), one_m_b2 = static_cast<T>(1.0 - beta2);
  const T inv_c1 = static_cast<T>(1.0 / (1.0 - std::pow(beta1, static_cast<double>(t))));
  const T inv_c2 = static_cast<T>(1.0 / (1.0 - std::pow(beta2, static_cast<double>(t))));
  const T lr_t = static_cast<T>(lr);
  const T eps_t = static_cast<T>(eps);

  for (size_t i = 0; i < leaves.size(); ++i) {
    const Tensor<T>& g = tape.grad(leaves[i]);
    Tensor<T>& p = tape.leaf_value(leaves[i]);
    Tensor<T>& m = state.m[i];
    Tensor<T>& v = state.v[i];
    for (int64_t k = 0; k < g.numel(); ++k) {
      if (!std::isfinite(static_cast<double>(g[k])))
        fail(ErrCode::numeric, "adam_step: non-finite gradient in leaf '" +
                                   tape.name(leaves[i]) + "' at index " + std::to_string(k));
      m[k] = b1 * m[k] + one_m_b1 * g[k];
      v[k] = b2 * v[k] + one_m_b2 * g[k] * g[k];
      const T mhat = m[k] * inv_c1;
      const T vhat = v[k] * inv_c2;
      p[k] -= lr_t * mhat / (std::sqrt(vhat) + eps_t);
    }
  }
}

template void adam_step(ad::Tape<float>&, std::span<const ad::ValueRef>, AdamState<float>&,
                        double, double, double, double, int64_t);
template void adam_step(ad::Tape<double>&, std::span<const ad::ValueRef>, AdamState<double>&,
                        double, double, double, double, int64_t);

namespace {

// Copy current leaf values back into parameter structures (training runs in T,
// results are carried in double).
template <typename T>
InrParameters extract_inr(const ad::Tape<T>& tape, std::span<const ad::ValueRef> leaves,
                          const InrParameters& archetype) {
  InrParameters out = archetype;
  size_t idx = 0;
  for (std::vector<Layer>* branch : {&out.real_branch, &out.imag_branch}) {
    for (Layer& layer : *branch) {
      const Tensor<T>& w = tape.value(leaves[idx++]);
      const Tensor<T>& b = tape.value(leaves[idx++]);
      for (int64_t k = 0; k < w.numel(); ++k) layer.w[k] = static_cast<double>(w[k]);
      for (int64_t k = 0; k < b.numel(); ++k) layer.b[k] = static_cast<double>(b[k]);
    }
  }
  return out;
}

template <typename T>
PolyCoefficients extract_poly(const ad::Tape<T>& tape, std::span<const ad::ValueRef> leaves,
                              const PolyCoefficients& archetype) {
  PolyCoefficients out = archetype;
  const int64_t terms = out.terms();
  size_t idx = 0;
  for (int64_t j = 0; j < out.coils; ++j)
    for (int64_t part = 0; part < 2; ++part) {
      const Tensor<T>& c = tape.value(leaves[idx++]);
      for (int64_t k = 0; k < terms; ++k)
        out.coeffs[(j * 2 + part) * terms + k] = static_cast<double>(c[k]);
    }
  return out;
}

template <typename T>
TrainedModel train_impl(const KSpaceVolume& measured, const ReconConfig& cfg) {
  const CoordinateGrid grid = make_grid(measured.d1, measured.d2);
  const Tensor<double>& raw = grid.coords;
  Tensor<double> encoded;
  if (cfg.use_pe) encoded = positional_encode(grid, cfg.pe_bands);
  const Tensor<double>& inputs = cfg.use_pe ? encoded : raw;

  const std::vector<int64_t> arch =
      make_arch(inputs.shape()[1], cfg.hidden_layers, cfg.hidden_width);
  InrParameters inr0 = cfg.activation == Activation::sine
                           ? init_siren(arch, cfg.w0, cfg.seed_inr)
                           : init_relu_mlp(arch, cfg.seed_inr);
  inr0.use_pe = cfg.use_pe;
  inr0.pe_bands = cfg.pe_bands;
  PolyCoefficients poly0 = init_poly(measured.coils, cfg.poly_order, cfg.seed_poly);
  const MonomialBasis basis = build_basis(grid, cfg.poly_order);

  ad::Tape<T> tape;
  ImageGraph image = eval_image(tape, inr0, inputs, measured.d1, measured.d2);
  SensGraph sens = eval_sensitivities(tape, poly0, basis, measured.d1, measured.d2);
  KspaceGraph predicted = forward_model(tape, image.image, sens.maps, measured.mask);
  ad::ValueRef dc = dc_loss(tape, predicted, measured);
  // Without the TV term the node is never recorded, so the graph (and the
  // whole run) is structurally independent of lambda; the history column then
  // reports the TV actually charged, i.e. zero.
  ad::ValueRef tv;
  if (cfg.use_tv) tv = tv_loss(tape, image.image);
  ad::ValueRef total = total_loss(tape, dc, tv, cfg.lambda, cfg.use_tv);

  AdamState<T> inr_state, poly_state;
  TrainHistory history;
  history.rows.reserve(cfg.iters);

  // Last parameter set that produced a finite loss, for abort diagnostics.
  std::vector<Tensor<T>> good_leaves;
  int64_t good_iteration = 0;
  auto snapshot = [&] {
    good_leaves.clear();
    for (ad::ValueRef l : tape.leaves()) good_leaves.push_back(tape.value(l));
  };
  auto restore_model = [&]() -> TrainedModel {
    size_t i = 0;
    for (ad::ValueRef l : tape.leaves()) tape.leaf_value(l) = good_leaves[i++];
    TrainedModel m;
    m.inr = extract_inr(tape, image.leaves, inr0);
    m.poly = extract_poly(tape, sens.leaves, poly0);
    m.history = history;
    return m;
  };

  const auto start = std::chrono::steady_clock::now();
  for (int64_t t = 0; t < cfg.iters; ++t) {
    if (t > 0) tape.forward();
    const double l_dc = static_cast<double>(tape.value(dc)[0]);
    const double l_tv = cfg.use_tv ? static_cast<double>(tape.value(tv)[0]) : 0.0;
    const double l_tot = static_cast<double>(tape.value(total)[0]);
    if (!std::isfinite(l_tot)) {
      auto last = good_iteration > 0
                      ? std::make_shared<const TrainedModel>(restore_model())
                      : nullptr;
      throw TrainAbort(t + 1, last,
                       "training aborted: non-finite loss at iteration " + std::to_string(t + 1) +
                           " (last finite loss at iteration " + std::to_string(good_iteration) +
                           ")");
    }
    snapshot();
    good_iteration = t + 1;

    tape.backward(total);
    const double lr_i = lr_schedule(cfg.lr_inr, cfg.lr_inr_decay, cfg.decay_every, t);
    const double lr_p = lr_schedule(cfg.lr_poly, cfg.lr_poly_decay, cfg.decay_every, t);
    try {
      adam_step(tape, std::span<const ad::ValueRef>(image.leaves), inr_state, lr_i, 0.9, 0.999,
                1e-8, t + 1);
      adam_step(tape, std::span<const ad::ValueRef>(sens.leaves), poly_state, lr_p, 0.9, 0.999,
                1e-8, t + 1);
    } catch (const Error& e) {
      auto last = std::make_shared<const TrainedModel>(restore_model());
      throw TrainAbort(t + 1, last,
                       std::string(e.what()) + " (iteration " + std::to_string(t + 1) + ")");
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.rows.push_back({t + 1, l_dc, l_tv, l_tot, lr_i, lr_p, secs});
  }

  TrainedModel model;
  model.inr = extract_inr(tape, image.leaves, inr0);
  model.poly = extract_poly(tape, sens.leaves, poly0);
  model.history = std::move(history);
  return model;
}

}  // namespace

TrainedModel train(const KSpaceVolume& measured, const ReconConfig& cfg) {
  validate(cfg);
  require(measured.coils >= 1 && measured.d1 >= 2 && measured.d2 >= 2, ErrCode::invalid_argument,
          "train: measured volume must have at least one coil and a 2x2 grid");
  require(measured.mask.kept_count() > 0, ErrCode::invalid_argument,
          "train: sampling mask keeps no lines");
  if (cfg.precision == Precision::single) return train_impl<float>(measured, cfg);
  return train_impl<double>(measured, cfg);
}

}  // namespace sirec
