#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinode/datagen.hpp"
#include "pinode/dynamics.hpp"
#include "pinode/hybrid_model.hpp"
#include "pinode/mlp.hpp"

namespace pinode {

// Per-coordinate squared-error weights. The angle weight applies in the
// (cos, sin) embedded space.
struct LossWeights {
  Vec2 lambda_q{1.0, 1.0};     // x, phi
  Vec2 lambda_qdot{1.0, 1.0};  // x_dot, phi_dot
};
void validate(const LossWeights& w);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 128;
  int epochs = 120;
  std::uint64_t seed = 0;
  LossWeights loss_weights;
  int horizon = 1;  // prediction steps per loss term
};
void validate(const TrainConfig& cfg);

struct Transition {
  State state;
  double u;
  State next;
};

// Consecutive-pair transitions of a (validated, uniformly sampled) dataset.
std::vector<Transition> extract_transitions(const Dataset& d);

// Mean one-step prediction loss of the hybrid model over a batch:
// lambda-weighted squared errors in x, the (cos, sin) angle embedding, and
// both velocities. Zero iff every weighted residual vanishes.
double step_loss(const PhysicalParams& p, const MlpParams& net,
                 std::span<const Transition> batch, const LossWeights& w, double h);

// Same arithmetic recorded on a tape; differentiable in the network
// parameters bound to `net`.
ad::Var step_loss_taped(const PhysicalParams& p, const TapedMlp& net,
                        std::span<const Transition> batch, const LossWeights& w,
                        double h);

// ---- optimizer -------------------------------------------------------------

struct AdamState {
  MlpTensor m, v;
  long t = 0;
};
AdamState make_adam_state(const MlpParams& p);

// Standard Adam update, beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
void adam_step(AdamState& st, MlpParams& params, const MlpTensor& grads, double lr);

// ---- training loop ---------------------------------------------------------

struct TrainReport {
  std::vector<double> epoch_loss;  // one sample-weighted mean per epoch
  MlpParams params;
  double duration_seconds = 0.0;
  TrainConfig config;
};

// Shuffled mini-batch Adam over one-step (or horizon-step) predictions.
// Deterministic for a fixed config seed. Throws numeric_error with the
// failing step index if the loss stops being finite.
TrainReport train(const PhysicalParams& p, const Dataset& data, const TrainConfig& cfg,
                  const MlpParams& initial);

// ---- mechanistic baseline ---------------------------------------------------

struct FrictionFit {
  double mu_c = 0.0;
  double mu_p = 0.0;
  double loss = 0.0;  // one-step loss at the fitted factors
};

// Least-squares fit of the two friction factors of the mechanistic model:
// coarse grid bracketing followed by coordinate golden-section refinement,
// both factors clamped to >= 0. The friction fields of `base` are ignored.
FrictionFit fit_baseline_friction(const PhysicalParams& base, const Dataset& data,
                                  double h);

}  // namespace pinode
