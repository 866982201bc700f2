#pragma once

#include <array>
#include <vector>

#include "pinode/dynamics.hpp"
#include "pinode/integrator.hpp"
#include "pinode/mlp.hpp"

namespace pinode {

// Network input layout, selected by the network's input width:
//   5: [x, wrap(phi), x_dot, phi_dot, u]   (raw wrapped angle)
//   6: [x, cos(phi), sin(phi), x_dot, phi_dot, u]
template <class S>
std::vector<S> hybrid_input(int width, const std::array<S, 4>& z, const S& u) {
  using std::cos;
  using std::sin;
  using ad::wrap_two_pi;
  if (width == 5) return {z[0], wrap_two_pi(z[1]), z[2], z[3], u};
  if (width == 6) return {z[0], cos(z[1]), sin(z[1]), z[2], z[3], u};
  throw std::invalid_argument("network input width must be 5 or 6");
}

// ---- plain-double forward models ------------------------------------------

inline std::array<double, 4> pure_ode_derivative(const DerivedConstants& dc,
                                                 const PhysicalParams& p,
                                                 const std::array<double, 4>& z,
                                                 double u) {
  return state_derivative(dc, z, u, [&](const std::array<double, 4>& zs, double uu) {
    const double sign = zs[2] > 0.0 ? 1.0 : (zs[2] < 0.0 ? -1.0 : 0.0);
    return std::array<double, 2>{uu - dc.m_tot * dc.g * p.mu_c * sign,
                                 -p.mu_p * zs[3]};
  });
}

inline std::array<double, 4> hybrid_derivative(const DerivedConstants& dc,
                                               const PhysicalParams& p,
                                               const MlpParams& net,
                                               const std::array<double, 4>& z,
                                               double u) {
  return state_derivative(dc, z, u, [&](const std::array<double, 4>& zs, double uu) {
    const std::vector<double> in = hybrid_input(net.layer_sizes.front(), zs, uu);
    const std::vector<double> q = mlp_forward(net, in);
    return std::array<double, 2>{q[0], -p.mu_p * zs[3]};
  });
}

// One sample-interval step of either model.
inline State pure_ode_step(const PhysicalParams& p, const State& s, double u, double h) {
  const DerivedConstants dc(p);
  const auto f = [&](double, const std::array<double, 4>& z, double uu) {
    return pure_ode_derivative(dc, p, z, uu);
  };
  return to_state(rk4_step(f, 0.0, to_array(s), u, h));
}

inline State hybrid_step(const PhysicalParams& p, const MlpParams& net, const State& s,
                         double u, double h) {
  const DerivedConstants dc(p);
  const auto f = [&](double, const std::array<double, 4>& z, double uu) {
    return hybrid_derivative(dc, p, net, z, uu);
  };
  return to_state(rk4_step(f, 0.0, to_array(s), u, h));
}

// ---- taped forward model ---------------------------------------------------

inline std::array<ad::Var, 4> hybrid_derivative(const DerivedConstants& dc,
                                                const PhysicalParams& p,
                                                const TapedMlp& net,
                                                const std::array<ad::Var, 4>& z,
                                                ad::Var u) {
  return state_derivative(dc, z, u,
                          [&](const std::array<ad::Var, 4>& zs, ad::Var uu) {
    const std::vector<ad::Var> in =
        hybrid_input(net.params->layer_sizes.front(), zs, uu);
    const std::vector<ad::Var> q = mlp_forward(net, in);
    return std::array<ad::Var, 2>{q[0], zs[3] * -p.mu_p};
  });
}

inline std::array<ad::Var, 4> hybrid_step_taped(const PhysicalParams& p,
                                                const TapedMlp& net,
                                                const std::array<ad::Var, 4>& z,
                                                ad::Var u, double h) {
  const DerivedConstants dc(p);
  const auto f = [&](double, const std::array<ad::Var, 4>& zs, ad::Var uu) {
    return hybrid_derivative(dc, p, net, zs, uu);
  };
  return rk4_step(f, 0.0, z, u, h);
}

}  // namespace pinode
