#include "pinode/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "pinode/rng.hpp"

namespace pinode {

void validate(const LossWeights& w) {
  const double vals[4] = {w.lambda_q[0], w.lambda_q[1], w.lambda_qdot[0], w.lambda_qdot[1]};
  double sum = 0.0;
  for (double v : vals) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw std::invalid_argument("loss weights must be non-negative and finite");
    }
    sum += v;
  }
  if (!(sum > 0.0)) {
    throw std::invalid_argument("at least one loss weight must be positive");
  }
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  validate(cfg.loss_weights);
}

std::vector<Transition> extract_transitions(const Dataset& d) {
  validate(d);
  std::vector<Transition> out;
  if (d.samples.size() < 2) return out;
  out.reserve(d.samples.size() - 1);
  for (std::size_t i = 0; i + 1 < d.samples.size(); ++i) {
    const Sample& a = d.samples[i];
    const Sample& b = d.samples[i + 1];
    out.push_back({{a.x, a.phi, a.x_dot, a.phi_dot}, a.u, {b.x, b.phi, b.x_dot, b.phi_dot}});
  }
  return out;
}

namespace {

// Weighted squared error of a predicted state against a fixed target; the
// template keeps the plain and taped paths arithmetically identical.
template <class S>
S transition_error(const std::array<S, 4>& pred, const State& target,
                   const LossWeights& w) {
  using std::cos;
  using std::sin;
  using ad::square;
  using ad::wrap_two_pi;
  const double tphi = ad::wrap_two_pi(target.phi);
  const S a = wrap_two_pi(pred[1]);
  S loss = w.lambda_q[0] * square(pred[0] - target.x);
  loss = loss + w.lambda_q[1] * (square(cos(a) - std::cos(tphi)) +
                                 square(sin(a) - std::sin(tphi)));
  loss = loss + w.lambda_qdot[0] * square(pred[2] - target.x_dot);
  loss = loss + w.lambda_qdot[1] * square(pred[3] - target.phi_dot);
  return loss;
}

}  // namespace

double step_loss(const PhysicalParams& p, const MlpParams& net,
                 std::span<const Transition> batch, const LossWeights& w, double h) {
  if (batch.empty()) throw std::invalid_argument("step_loss: batch must be non-empty");
  validate(w);
  double sum = 0.0;
  for (const Transition& tr : batch) {
    const State pred = hybrid_step(p, net, tr.state, tr.u, h);
    sum += transition_error(to_array(pred), tr.next, w);
  }
  return sum / static_cast<double>(batch.size());
}

ad::Var step_loss_taped(const PhysicalParams& p, const TapedMlp& net,
                        std::span<const Transition> batch, const LossWeights& w,
                        double h) {
  if (batch.empty()) throw std::invalid_argument("step_loss: batch must be non-empty");
  validate(w);
  ad::Tape& tape = *net.tape;
  ad::Var sum;
  bool first = true;
  for (const Transition& tr : batch) {
    const std::array<ad::Var, 4> z{tape.leaf(tr.state.x), tape.leaf(tr.state.phi),
                                   tape.leaf(tr.state.x_dot), tape.leaf(tr.state.phi_dot)};
    const std::array<ad::Var, 4> pred =
        hybrid_step_taped(p, net, z, tape.leaf(tr.u), h);
    const ad::Var err = transition_error(pred, tr.next, w);
    sum = first ? err : sum + err;
    first = false;
  }
  return sum / static_cast<double>(batch.size());
}

AdamState make_adam_state(const MlpParams& p) {
  return {zeros_like(p), zeros_like(p), 0};
}

void adam_step(AdamState& st, MlpParams& params, const MlpTensor& grads, double lr) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (st.m.layers.size() != params.layers.size() ||
      grads.layers.size() != params.layers.size()) {
    throw std::invalid_argument("adam_step: layer count mismatch");
  }
  st.t += 1;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    auto apply = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                     const std::vector<double>& g) {
      if (p.size() != g.size() || m.size() != g.size() || v.size() != g.size()) {
        throw std::invalid_argument("adam_step: shape mismatch in layer " + std::to_string(li));
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      }
    };
    apply(params.layers[li].w, st.m.layers[li].w, st.v.layers[li].w, grads.layers[li].w);
    apply(params.layers[li].b, st.m.layers[li].b, st.v.layers[li].b, grads.layers[li].b);
  }
}

TrainReport train(const PhysicalParams& p, const Dataset& data, const TrainConfig& cfg,
                  const MlpParams& initial) {
  validate(p);
  validate(cfg);
  validate(initial);
  const auto t_begin = std::chrono::steady_clock::now();
  const double h = 1.0 / data.sample_rate;
  const int horizon = cfg.horizon;

  const std::ptrdiff_t n_samples = static_cast<std::ptrdiff_t>(data.samples.size());
  const std::ptrdiff_t n_windows = n_samples - horizon;
  if (n_windows < cfg.batch_size) {
    throw std::invalid_argument("train: dataset has " + std::to_string(std::max<std::ptrdiff_t>(n_windows, 0)) +
                                " transitions but batch_size is " +
                                std::to_string(cfg.batch_size));
  }
  validate(data);

  TrainReport report;
  report.config = cfg;
  report.params = initial;

  std::vector<std::int64_t> order(static_cast<std::size_t>(n_windows));
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(split_seed(cfg.seed, SeedStream::train_shuffle));

  ad::Tape tape;
  AdamState opt = make_adam_state(report.params);
  long global_step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_sum = 0.0;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
      const std::size_t batch_n = std::min<std::size_t>(cfg.batch_size, order.size() - pos);
      ++global_step;
      try {
        tape.reset();
        const TapedMlp net = bind(tape, report.params);
        ad::Var sum;
        for (std::size_t b = 0; b < batch_n; ++b) {
          const auto idx = static_cast<std::size_t>(order[pos + b]);
          const Sample& s0 = data.samples[idx];
          std::array<ad::Var, 4> z{tape.leaf(s0.x), tape.leaf(s0.phi),
                                   tape.leaf(s0.x_dot), tape.leaf(s0.phi_dot)};
          for (int k = 0; k < horizon; ++k) {
            z = hybrid_step_taped(p, net, z, tape.leaf(data.samples[idx + k].u), h);
          }
          const Sample& st = data.samples[idx + horizon];
          const ad::Var err =
              transition_error(z, State{st.x, st.phi, st.x_dot, st.phi_dot},
                               cfg.loss_weights);
          sum = b == 0 ? err : sum + err;
        }
        const ad::Var batch_loss = sum / static_cast<double>(batch_n);
        tape.backward(batch_loss);
        epoch_sum += batch_loss.value() * static_cast<double>(batch_n);
        const MlpTensor grads = extract_gradients(net);
        adam_step(opt, report.params, grads, cfg.learning_rate);
      } catch (const numeric_error& e) {
        throw numeric_error("training step " + std::to_string(global_step) + " (epoch " +
                            std::to_string(epoch) + "): " + e.what());
      }
    }
    report.epoch_loss.push_back(epoch_sum / static_cast<double>(order.size()));
  }
  report.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return report;
}

FrictionFit fit_baseline_friction(const PhysicalParams& base, const Dataset& data,
                                  double h) {
  const std::vector<Transition> trans = extract_transitions(data);
  if (trans.empty()) throw std::invalid_argument("fit_baseline_friction: empty dataset");
  const LossWeights w{};

  const auto objective = [&](double mu_c, double mu_p) {
    PhysicalParams q = base;
    q.mu_c = mu_c;
    q.mu_p = mu_p;
    double sum = 0.0;
    for (const Transition& tr : trans) {
      const State pred = pure_ode_step(q, tr.state, tr.u, h);
      sum += transition_error(to_array(pred), tr.next, w);
    }
    return sum / static_cast<double>(trans.size());
  };

  // coarse bracket
  constexpr double mu_c_max = 0.2, mu_p_max = 0.02;
  constexpr int grid = 17;
  double best_c = 0.0, best_p = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double mc = mu_c_max * i / (grid - 1);
      const double mp = mu_p_max * j / (grid - 1);
      const double v = objective(mc, mp);
      if (v < best) {
        best = v;
        best_c = mc;
        best_p = mp;
      }
    }
  }

  // golden-section refinement, one coordinate at a time
  constexpr double gr = 0.6180339887498949;
  const auto golden = [&](double center, double radius, double lo_clamp,
                          const auto& f) {
    double a = std::max(lo_clamp, center - radius);
    double b = center + radius;
    for (int it = 0; it < 60; ++it) {
      const double c1 = b - gr * (b - a);
      const double c2 = a + gr * (b - a);
      if (f(c1) < f(c2)) {
        b = c2;
      } else {
        a = c1;
      }
    }
    return 0.5 * (a + b);
  };
  const double step_c = mu_c_max / (grid - 1), step_p = mu_p_max / (grid - 1);
  for (int sweep = 0; sweep < 3; ++sweep) {
    const double rc = sweep == 0 ? step_c : step_c / 16.0;
    const double rp = sweep == 0 ? step_p : step_p / 16.0;
    best_c = golden(best_c, rc, 0.0, [&](double mc) { return objective(mc, best_p); });
    best_p = golden(best_p, rp, 0.0, [&](double mp) { return objective(best_c, mp); });
  }
  return {best_c, best_p, objective(best_c, best_p)};
}

}  // namespace pinode
