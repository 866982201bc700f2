#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pinode/dynamics.hpp"
#include "pinode/integrator.hpp"

namespace pinode {

// Ground-truth simulator configuration. The rig deliberately contains
// effects the identification models do not know about: direction-dependent
// cart friction, first-order actuator lag, quadratic pole air drag, and
// rails the cart stops at. A weak virtual-operator centering force keeps
// the cart on the track the way a human at the controls would; it is part
// of the applied (and recorded) control input.
struct RigConfig {
  PhysicalParams base;
  double mu_c_pos = 0.060;          // cart friction while moving right
  double mu_c_neg = 0.025;          // cart friction while moving left
  double actuator_tau = 0.0;        // control-lag time constant (s); 0 = none
  double drag_coeff = 0.0;          // quadratic pole drag (N*m*s^2/rad^2)
  double noise_x = 1e-5;            // position noise std (m)
  double noise_phi = 1e-5;          // angle noise std (rad)
  double track_half_length = 0.3;   // cart stops at +-this (m)
  double inner_step = 0.002;        // simulation substep (s)
  double centering_stiffness = 4.0; // virtual operator, N per m of offset
  double centering_damping = 0.5;   // virtual operator, N per m/s
};

// inner_step must divide the sample interval; noise stds must be >= 0.
void validate(const RigConfig& cfg, double sample_rate);

struct Sample {
  double t;        // s
  double x;        // m
  double phi;      // rad, reported wrapped into [0, 2pi)
  double x_dot;    // m/s, backward finite difference of reported positions
  double phi_dot;  // rad/s, same
  double u;        // N, control applied over [t, t + 1/rate)
};

struct Dataset {
  double sample_rate = 50.0;  // Hz
  std::vector<Sample> samples;
  std::string provenance;
};

// Uniform, strictly increasing timestamps at 1/sample_rate spacing.
void validate(const Dataset& d);

// Piecewise-constant random force: hold times uniform in [0.1, 0.5] s,
// levels uniform in [-amplitude, amplitude], then a centered 3-sample moving
// average. Returns round(duration * sample_rate) values; deterministic per
// seed.
std::vector<double> excitation_signal(double duration, double sample_rate,
                                      double amplitude, std::uint64_t seed);

// Ground truth at sample instants plus the control that was actually applied
// (excitation + centering, held over each sample interval).
struct RigRun {
  Trajectory states;            // len(excitation) + 1, starting at z0
  std::vector<double> applied_u;  // len(excitation)
};

// Integrates the true dynamics with RK4 at inner_step. The commanded force
// follows du_lag/dt = (u - u_lag)/actuator_tau when actuator_tau > 0. The
// cart stops dead (x_dot <- 0) when it reaches a rail. Deterministic; the
// seed is reserved for future stochastic effects.
RigRun simulate_rig(const RigConfig& cfg, std::span<const double> excitation,
                    const State& z0, double sample_rate, std::uint64_t seed);

// 50 Hz-style sensor readout: Gaussian noise on positions, velocities as
// backward finite differences of the noisy (unwrapped) positions with
// v_0 = 0, and the angle reported wrapped into [0, 2pi).
Dataset sensor_model(const RigRun& truth, const RigConfig& cfg, double sample_rate,
                     std::uint64_t seed);

struct ChannelStats {
  double mean, stdev, min, max;  // population statistics
};
struct DatasetStats {
  std::size_t count;
  double sample_rate;
  ChannelStats x, phi, x_dot, phi_dot, u;
};
DatasetStats dataset_stats(const Dataset& d);
std::string format_stats(const DatasetStats& s);

// CSV with header t,x,phi,x_dot,phi_dot,u; '#' comment lines carry
// provenance; 17-significant-digit values so round trips are value-exact.
void write_csv(const Dataset& d, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);

}  // namespace pinode
