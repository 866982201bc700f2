#include "pinode/dynamics.hpp"

namespace pinode {

void validate(const PhysicalParams& p) {
  const bool masses_ok = p.m_c > 0.0 && p.m_p > 0.0 && p.m_s > 0.0;
  if (!masses_ok || !(p.l > 0.0) || !(p.g > 0.0)) {
    throw std::invalid_argument("masses, pole length and gravity must be positive");
  }
  if (p.mu_c < 0.0 || p.mu_p < 0.0) {
    throw std::invalid_argument("friction factors must be non-negative");
  }
}

Mat2 mass_matrix(const PhysicalParams& p, const State& s) {
  const DerivedConstants dc(p);
  const double off = dc.sigma * std::cos(s.phi);
  return {{{dc.m_tot, off}, {off, dc.j_pivot}}};
}

Vec2 coriolis_term(const PhysicalParams& p, const State& s) {
  const DerivedConstants dc(p);
  return {-dc.sigma * std::sin(s.phi) * s.phi_dot * s.phi_dot, 0.0};
}

Vec2 gravity_term(const PhysicalParams& p, const State& s) {
  const DerivedConstants dc(p);
  return {0.0, -dc.sigma * p.g * std::sin(s.phi)};
}

Energy energy(const PhysicalParams& p, const State& s) {
  const DerivedConstants dc(p);
  const double t = 0.5 * dc.m_tot * s.x_dot * s.x_dot +
                   dc.sigma * std::cos(s.phi) * s.x_dot * s.phi_dot +
                   0.5 * dc.j_pivot * s.phi_dot * s.phi_dot;
  const double v = dc.sigma * p.g * std::cos(s.phi);
  return {t, v};
}

Vec2 pure_ode_forces(const PhysicalParams& p, const State& s, double u) {
  const DerivedConstants dc(p);
  const double sign = s.x_dot > 0.0 ? 1.0 : (s.x_dot < 0.0 ? -1.0 : 0.0);
  return {u - dc.m_tot * p.g * p.mu_c * sign, -p.mu_p * s.phi_dot};
}

Vec2 hybrid_forces(const PhysicalParams& p, const MlpParams& net, const State& s,
                   double u) {
  if (net.layer_sizes.front() != 5) {
    throw std::invalid_argument("hybrid_forces: network input width must be 5");
  }
  const std::array<double, 5> in{s.x, ad::wrap_two_pi(s.phi), s.x_dot, s.phi_dot, u};
  const std::vector<double> out = mlp_forward(net, in);
  return {out[0], -p.mu_p * s.phi_dot};
}

Vec2 acceleration(const PhysicalParams& p, const State& s, const Vec2& forces) {
  const DerivedConstants dc(p);
  const std::array<double, 4> z{s.x, s.phi, s.x_dot, s.phi_dot};
  const std::array<double, 2> acc = accel_from_forces(dc, z, forces[0], forces[1]);
  return {acc[0], acc[1]};
}

}  // namespace pinode
