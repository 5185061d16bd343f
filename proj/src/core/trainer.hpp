#pragma once

#include <memory>
#include <span>
#include <vector>

#include "core/coil.hpp"
#include "core/config.hpp"
#include "core/inr.hpp"
#include "core/mrop.hpp"
#include "core/tape.hpp"
#include "core/types.hpp"

namespace sirec {

/// One record per completed iteration.  `seconds` is wall-clock time since
/// the start of training; learning rates are the ones used at that iteration.
struct TrainHistory {
  struct Row {
    int64_t iteration;  // 1-based
    double l_dc, l_tv, l_tot;
    double lr_inr, lr_poly;
    double seconds;
  };
  std::vector<Row> rows;
};

struct TrainedModel {
  InrParameters inr;
  PolyCoefficients poly;
  TrainHistory history;
};

/// Thrown when training hits a non-finite loss or gradient; carries the
/// iteration index and the last parameter set that produced a finite loss.
class TrainAbort : public Error {
 public:
  TrainAbort(int64_t iteration, std::shared_ptr<const TrainedModel> last_good, std::string msg)
      : Error(ErrCode::numeric, std::move(msg)),
        iteration_(iteration),
        last_good_(std::move(last_good)) {}
  int64_t iteration() const noexcept { return iteration_; }
  const TrainedModel* last_good() const noexcept { return last_good_.get(); }

 private:
  int64_t iteration_;
  std::shared_ptr<const TrainedModel> last_good_;
};

/// Data-consistency term: sum over coils and k-space entries of
/// |re residual| + |im residual| between measured data and the (masked)
/// prediction.  Unsampled entries cancel exactly since both sides are zero.
template <typename T>
ad::ValueRef dc_loss(ad::Tape<T>& tape, const KspaceGraph& predicted,
                     const KSpaceVolume& measured);

/// Anisotropic total variation of the split-complex image: L1 of forward
/// differences along both axes, real and imaginary parts separately,
/// replicate boundary (last row/column difference is zero).
template <typename T>
ad::ValueRef tv_loss(ad::Tape<T>& tape, const ad::ComplexRef& image);

/// dc + lambda * tv; with use_tv=false the TV term is omitted entirely, so
/// the result is structurally independent of lambda.
template <typename T>
ad::ValueRef total_loss(ad::Tape<T>& tape, ad::ValueRef dc, ad::ValueRef tv, double lambda,
                        bool use_tv);

/// lr(t) = initial * factor^floor(t / every), t counted from 0.
double lr_schedule(double initial, double factor, int64_t every, int64_t t);

/// First and second Adam moments per leaf.
template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m, v;
};

/// Standard bias-corrected Adam update applied in place to the given leaves.
/// `t` is the 1-based step count.  A non-finite gradient aborts with a
/// diagnostic naming the offending leaf.
template <typename T>
void adam_step(ad::Tape<T>& tape, std::span<const ad::ValueRef> leaves, AdamState<T>& state,
               double lr, double beta1, double beta2, double eps, int64_t t);

/// Full-grid joint optimization of the image networks and the polynomial
/// coefficients from one undersampled acquisition.  Every iteration evaluates
/// the whole coordinate grid (no minibatching), backpropagates the composite
/// loss and applies the two Adam optimizers with their own schedules.
TrainedModel train(const KSpaceVolume& measured, const ReconConfig& cfg);

}  // namespace sirec
