#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "pinode/ad.hpp"
#include "pinode/mlp.hpp"

namespace pinode {

// Cart-pole rig constants. The pole is a uniform rod of mass m_p with a
// point mass m_s (the sphere) at distance l from the pivot.
struct PhysicalParams {
  double m_c = 0.466;   // cart mass (kg)
  double m_p = 0.06;    // pole mass (kg)
  double m_s = 0.012;   // sphere mass (kg)
  double l = 0.201;     // pole length (m)
  double mu_c = 0.0408; // cart Coulomb friction factor (dimensionless)
  double mu_p = 0.0020; // pole viscous friction factor (N*m*s/rad)
  double g = 9.81;      // gravity (m/s^2)
};

void validate(const PhysicalParams& p);

// Generalized coordinates and velocities. phi is measured from the upward
// vertical, positive counterclockwise, and is kept unwrapped internally.
struct State {
  double x = 0.0;
  double phi = 0.0;
  double x_dot = 0.0;
  double phi_dot = 0.0;
};

// Quantities entering the matrix form of the equations of motion.
// m_tot * j_pivot > sigma^2 keeps the mass matrix positive definite for
// every pole angle.
struct DerivedConstants {
  double m_tot;    // m_c + m_p + m_s (kg)
  double sigma;    // first mass moment about the pivot: m_p*l/2 + m_s*l (kg*m)
  double j_pivot;  // inertia about the pivot: m_p*l^2/3 + m_s*l^2 (kg*m^2)
  double g;        // gravity, carried along for the force terms

  explicit DerivedConstants(const PhysicalParams& p)
      : m_tot(p.m_c + p.m_p + p.m_s),
        sigma(p.m_p * p.l / 2.0 + p.m_s * p.l),
        j_pivot(p.m_p * p.l * p.l / 3.0 + p.m_s * p.l * p.l),
        g(p.g) {}
};

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 mass_matrix(const PhysicalParams& p, const State& s);

// Velocity-product forces, returned already multiplied by the generalized
// velocities (the explicit acceleration only ever needs the product).
Vec2 coriolis_term(const PhysicalParams& p, const State& s);

// Conservative forces dV/dq for V = sigma * g * cos(phi).
Vec2 gravity_term(const PhysicalParams& p, const State& s);

struct Energy {
  double kinetic;
  double potential;
  double total() const { return kinetic + potential; }
};
Energy energy(const PhysicalParams& p, const State& s);

// Mechanistic non-conservative forces: Coulomb cart friction with constant
// normal force plus viscous pole friction. sign(0) is 0, so a resting cart
// feels no friction.
Vec2 pure_ode_forces(const PhysicalParams& p, const State& s, double u);

// Hybrid forces: the cart force comes entirely from the network (the control
// input enters the hybrid model only through it); the pole keeps viscous
// friction. The network takes [x, phi, x_dot, phi_dot, u] with phi wrapped
// into [0, 2pi) to match the sensor's reported angle range.
Vec2 hybrid_forces(const PhysicalParams& p, const MlpParams& net, const State& s,
                   double u);

// Solves M(q) qdd = Q - C qd - G by the closed-form 2x2 inverse.
Vec2 acceleration(const PhysicalParams& p, const State& s, const Vec2& forces);

// ---- scalar-generic core shared by the plain and taped paths --------------

// z layout everywhere: [x, phi, x_dot, phi_dot].

// qdd from generalized forces; instantiated with S = double and S = ad::Var.
template <class S>
std::array<S, 2> accel_from_forces(const DerivedConstants& dc,
                                   const std::array<S, 4>& z, const S& fx,
                                   const S& fphi) {
  using std::sin;
  using std::cos;
  using ad::square;
  const S c = cos(z[1]);
  const S sn = sin(z[1]);
  // rhs = Q - C*qd - G
  const S rhs0 = fx + dc.sigma * sn * square(z[3]);
  const S rhs1 = fphi + dc.sigma * dc.g * sn;
  const S det = dc.m_tot * dc.j_pivot - square(dc.sigma * c);
  if (!(ad::value_of(det) >= 1e-12)) {
    throw numeric_error("acceleration: mass matrix determinant below 1e-12");
  }
  return {(dc.j_pivot * rhs0 - dc.sigma * c * rhs1) / det,
          (dc.m_tot * rhs1 - dc.sigma * c * rhs0) / det};
}

// Full state derivative [x_dot, phi_dot, x_ddot, phi_ddot] given a force
// callback (z, u) -> {fx, fphi}.
template <class S, class U, class ForceFn>
std::array<S, 4> state_derivative(const DerivedConstants& dc,
                                  const std::array<S, 4>& z, const U& u,
                                  const ForceFn& forces) {
  const std::array<S, 2> q = forces(z, u);
  const std::array<S, 2> acc = accel_from_forces(dc, z, q[0], q[1]);
  return {z[2], z[3], acc[0], acc[1]};
}

}  // namespace pinode
