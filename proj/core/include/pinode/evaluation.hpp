#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pinode/datagen.hpp"
#include "pinode/hybrid_model.hpp"

namespace pinode {

// A forward model advances a measured state by one sample interval.
using ForwardModel = std::function<State(const State&, double u)>;

ForwardModel make_pure_ode_model(const PhysicalParams& p, double h);
ForwardModel make_pinode_model(const PhysicalParams& p, MlpParams net, double h);

struct NamedModel {
  std::string name;
  ForwardModel step;
};

// Multi-second rollout of each model from one measured state, next to the
// measured slice it is judged against.
struct RolloutComparison {
  int start_index = 0;
  double h = 0.0;
  std::vector<std::string> names;
  std::vector<Trajectory> predicted;  // one per model, steps + 1 states
  Trajectory truth;                   // dataset slice, steps + 1 states
};

RolloutComparison rollout_compare(std::span<const NamedModel> models, const Dataset& d,
                                  int start_index, int steps);

struct NormalFit {
  double mu = 0.0;
  double sigma = 0.0;
};

// Sample mean and sample standard deviation (n-1 denominator); needs >= 2
// values.
NormalFit fit_normal(std::span<const double> values);

enum class ErrorMode { terminal, averaged };

struct WindowSpec {
  int window = 30;
  int count = 1000;
  std::uint64_t seed = 0;
  ErrorMode mode = ErrorMode::terminal;
  bool tiled = false;  // consecutive non-overlapping windows instead of random
};

// Absolute prediction errors over many short windows, one rollout per
// window from the measured initial state with the recorded controls.
// Angle errors are wrapped differences mapped to [0, pi].
struct ErrorSummary {
  WindowSpec spec;
  std::vector<int> starts;                     // window start rows, in draw order
  std::array<std::vector<double>, 4> errors;   // x, phi, x_dot, phi_dot
  std::array<NormalFit, 4> fits;
};

ErrorSummary windowed_errors(const ForwardModel& model, const Dataset& d,
                             const WindowSpec& spec);

enum class PlotFormat { csv, json };

// Tidy long-format plot data: (series, step, value) rows plus a metadata
// header; deterministic ordering.
void emit_plot_data(const RolloutComparison& rc, const std::filesystem::path& path,
                    PlotFormat format);
void emit_plot_data(std::span<const std::pair<std::string, ErrorSummary>> results,
                    const std::filesystem::path& path, PlotFormat format);

}  // namespace pinode
