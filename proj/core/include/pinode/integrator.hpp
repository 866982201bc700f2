#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pinode/dynamics.hpp"
#include "pinode/errors.hpp"

namespace pinode {

using Trajectory = std::vector<State>;

inline std::array<double, 4> to_array(const State& s) {
  return {s.x, s.phi, s.x_dot, s.phi_dot};
}
inline State to_state(const std::array<double, 4>& z) {
  return {z[0], z[1], z[2], z[3]};
}

namespace detail {

template <class S>
std::array<S, 4> axpy4(const std::array<S, 4>& z, const std::array<S, 4>& k, double c) {
  return {z[0] + k[0] * c, z[1] + k[1] * c, z[2] + k[2] * c, z[3] + k[3] * c};
}

inline void check_stage(const std::array<double, 4>& k, const char* stage) {
  for (double v : k) {
    if (!std::isfinite(v)) {
      throw numeric_error(std::string("rk4 stage ") + stage + " produced a non-finite value");
    }
  }
}
inline void check_stage(const std::array<ad::Var, 4>&, const char*) {
  // tape ops already check as they record; stage context is added by the
  // catch in rk4_step
}

}  // namespace detail

// One classical fourth-order Runge-Kutta step of z' = f(t, z, u) with the
// control held constant across all four stages (zero-order hold). Built from
// the same elementary operations the gradient tape records, so the step is
// differentiable end to end when instantiated with S = ad::Var.
//
// h may be negative (used by time-reversal checks); it must be non-zero and
// finite.
template <class S, class U, class F>
std::array<S, 4> rk4_step(F&& f, double t, const std::array<S, 4>& z, const U& u,
                          double h) {
  if (h == 0.0 || !std::isfinite(h)) {
    throw std::invalid_argument("rk4_step: h must be non-zero and finite");
  }
  using detail::axpy4;
  const auto stage = [&](double ts, const std::array<S, 4>& zs, const char* name) {
    try {
      std::array<S, 4> d = f(ts, zs, u);
      std::array<S, 4> k = {d[0] * h, d[1] * h, d[2] * h, d[3] * h};
      detail::check_stage(k, name);
      return k;
    } catch (const numeric_error& e) {
      throw numeric_error(std::string("rk4 stage ") + name + ": " + e.what());
    }
  };
  const std::array<S, 4> k1 = stage(t, z, "k1");
  const std::array<S, 4> k2 = stage(t + h / 2.0, axpy4(z, k1, 0.5), "k2");
  const std::array<S, 4> k3 = stage(t + h / 2.0, axpy4(z, k2, 0.5), "k3");
  const std::array<S, 4> k4 = stage(t + h, axpy4(z, k3, 1.0), "k4");
  std::array<S, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = z[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) / 6.0;
  }
  return out;
}

// Fixed-step integration from z0 through one rk4_step per control value.
// Returns len(controls) + 1 states, starting with z0.
template <class F>
Trajectory rollout(F&& f, const State& z0, std::span<const double> controls, double h) {
  if (controls.empty()) {
    throw std::invalid_argument("rollout: controls must be non-empty");
  }
  if (!(h > 0.0)) {
    throw std::invalid_argument("rollout: h must be positive");
  }
  Trajectory traj;
  traj.reserve(controls.size() + 1);
  traj.push_back(z0);
  std::array<double, 4> z = to_array(z0);
  for (std::size_t n = 0; n < controls.size(); ++n) {
    try {
      z = rk4_step(f, static_cast<double>(n) * h, z, controls[n], h);
    } catch (const numeric_error& e) {
      throw numeric_error("rollout step " + std::to_string(n) + ": " + e.what());
    }
    traj.push_back(to_state(z));
  }
  return traj;
}

}  // namespace pinode
