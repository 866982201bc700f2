#include "pinode/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "pinode/rng.hpp"

namespace pinode {

ForwardModel make_pure_ode_model(const PhysicalParams& p, double h) {
  validate(p);
  return [p, h](const State& s, double u) { return pure_ode_step(p, s, u, h); };
}

ForwardModel make_pinode_model(const PhysicalParams& p, MlpParams net, double h) {
  validate(p);
  validate(net);
  return [p, net = std::move(net), h](const State& s, double u) {
    return hybrid_step(p, net, s, u, h);
  };
}

RolloutComparison rollout_compare(std::span<const NamedModel> models, const Dataset& d,
                                  int start_index, int steps) {
  const auto n = static_cast<std::ptrdiff_t>(d.samples.size());
  if (start_index < 0 || steps < 0 || start_index + steps >= n) {
    throw std::invalid_argument("rollout_compare: window [" + std::to_string(start_index) +
                                ", +" + std::to_string(steps) + "] exceeds the dataset");
  }
  RolloutComparison rc;
  rc.start_index = start_index;
  rc.h = 1.0 / d.sample_rate;
  for (int k = 0; k <= steps; ++k) {
    const Sample& s = d.samples[start_index + k];
    rc.truth.push_back({s.x, s.phi, s.x_dot, s.phi_dot});
  }
  for (const NamedModel& m : models) {
    Trajectory traj;
    traj.reserve(steps + 1);
    State z = rc.truth.front();
    traj.push_back(z);
    for (int k = 0; k < steps; ++k) {
      z = m.step(z, d.samples[start_index + k].u);
      traj.push_back(z);
    }
    rc.names.push_back(m.name);
    rc.predicted.push_back(std::move(traj));
  }
  return rc;
}

NormalFit fit_normal(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("fit_normal: needs at least 2 values");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

namespace {

double angle_error(double a, double b) {
  return std::fabs(std::remainder(a - b, 2.0 * std::numbers::pi));
}

}  // namespace

ErrorSummary windowed_errors(const ForwardModel& model, const Dataset& d,
                             const WindowSpec& spec) {
  if (spec.window < 1) throw std::invalid_argument("windowed_errors: window must be >= 1");
  if (spec.count < 1) throw std::invalid_argument("windowed_errors: count must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(d.samples.size());
  const std::ptrdiff_t candidates = n - spec.window;  // valid start rows
  if (candidates < 1) {
    throw std::invalid_argument("windowed_errors: dataset shorter than one window");
  }

  ErrorSummary out;
  out.spec = spec;
  if (spec.tiled) {
    for (std::ptrdiff_t s = 0; s + spec.window < n && out.starts.size() <
                               static_cast<std::size_t>(spec.count);
         s += spec.window) {
      out.starts.push_back(static_cast<int>(s));
    }
  } else {
    Rng rng(spec.seed);
    const std::ptrdiff_t disjoint = (n - 1) / spec.window;
    if (disjoint >= spec.count) {
      // enough room: draw distinct start rows
      std::vector<std::int32_t> pool(static_cast<std::size_t>(candidates));
      std::iota(pool.begin(), pool.end(), 0);
      for (int k = 0; k < spec.count; ++k) {
        const auto j = static_cast<std::size_t>(k) + rng.below(pool.size() - k);
        std::swap(pool[k], pool[j]);
        out.starts.push_back(pool[k]);
      }
    } else {
      for (int k = 0; k < spec.count; ++k) {
        out.starts.push_back(static_cast<int>(rng.below(candidates)));
      }
    }
  }

  for (int start : out.starts) {
    State z{d.samples[start].x, d.samples[start].phi, d.samples[start].x_dot,
            d.samples[start].phi_dot};
    std::array<double, 4> acc{0.0, 0.0, 0.0, 0.0};
    for (int k = 0; k < spec.window; ++k) {
      z = model(z, d.samples[start + k].u);
      if (spec.mode == ErrorMode::averaged) {
        const Sample& m = d.samples[start + k + 1];
        acc[0] += std::fabs(z.x - m.x);
        acc[1] += angle_error(z.phi, m.phi);
        acc[2] += std::fabs(z.x_dot - m.x_dot);
        acc[3] += std::fabs(z.phi_dot - m.phi_dot);
      }
    }
    const Sample& m = d.samples[start + spec.window];
    std::array<double, 4> err;
    if (spec.mode == ErrorMode::averaged) {
      for (int c = 0; c < 4; ++c) err[c] = acc[c] / spec.window;
    } else {
      err = {std::fabs(z.x - m.x), angle_error(z.phi, m.phi),
             std::fabs(z.x_dot - m.x_dot), std::fabs(z.phi_dot - m.phi_dot)};
    }
    for (int c = 0; c < 4; ++c) out.errors[c].push_back(err[c]);
  }

  for (int c = 0; c < 4; ++c) {
    if (out.errors[c].size() >= 2) {
      out.fits[c] = fit_normal(out.errors[c]);
    } else {
      out.fits[c] = {out.errors[c].empty() ? 0.0 : out.errors[c].front(), 0.0};
    }
  }
  return out;
}

// ---- plot data -------------------------------------------------------------

namespace {

constexpr const char* k_channels[4] = {"x", "phi", "x_dot", "phi_dot"};

void append_g17(std::string& s, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  s.append(buf, static_cast<std::size_t>(len));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw io_error("failed writing " + path.string());
}

double state_channel(const State& s, int c) {
  switch (c) {
    case 0: return s.x;
    case 1: return s.phi;
    case 2: return s.x_dot;
    default: return s.phi_dot;
  }
}

}  // namespace

void emit_plot_data(const RolloutComparison& rc, const std::filesystem::path& path,
                    PlotFormat format) {
  if (format == PlotFormat::csv) {
    std::string text = "# kind: rollout\n# start_index: " + std::to_string(rc.start_index) +
                       "\n# h: ";
    append_g17(text, rc.h);
    text += "\nseries,step,value\n";
    const auto emit_traj = [&](const std::string& name, const Trajectory& traj) {
      for (int c = 0; c < 4; ++c) {
        for (std::size_t k = 0; k < traj.size(); ++k) {
          text += name;
          text += '.';
          text += k_channels[c];
          text += ',';
          text += std::to_string(k);
          text += ',';
          append_g17(text, state_channel(traj[k], c));
          text += '\n';
        }
      }
    };
    emit_traj("truth", rc.truth);
    for (std::size_t m = 0; m < rc.names.size(); ++m) {
      emit_traj(rc.names[m], rc.predicted[m]);
    }
    write_text(path, text);
    return;
  }
  nlohmann::ordered_json doc;
  doc["meta"] = {{"kind", "rollout"}, {"start_index", rc.start_index}, {"h", rc.h}};
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  const auto emit_traj = [&](const std::string& name, const Trajectory& traj) {
    for (int c = 0; c < 4; ++c) {
      for (std::size_t k = 0; k < traj.size(); ++k) {
        rows.push_back({{"series", name + "." + k_channels[c]},
                        {"step", k},
                        {"value", state_channel(traj[k], c)}});
      }
    }
  };
  emit_traj("truth", rc.truth);
  for (std::size_t m = 0; m < rc.names.size(); ++m) {
    emit_traj(rc.names[m], rc.predicted[m]);
  }
  write_text(path, doc.dump(2) + "\n");
}

void emit_plot_data(std::span<const std::pair<std::string, ErrorSummary>> results,
                    const std::filesystem::path& path, PlotFormat format) {
  if (format == PlotFormat::csv) {
    std::string text = "# kind: window_errors\n";
    for (const auto& [name, summary] : results) {
      text += "# model: " + name + " window: " + std::to_string(summary.spec.window) +
              " count: " + std::to_string(summary.spec.count);
      for (int c = 0; c < 4; ++c) {
        text += std::string(" ") + k_channels[c] + "_mu: ";
        append_g17(text, summary.fits[c].mu);
        text += std::string(" ") + k_channels[c] + "_sigma: ";
        append_g17(text, summary.fits[c].sigma);
      }
      text += '\n';
    }
    text += "series,window,value\n";
    for (const auto& [name, summary] : results) {
      for (int c = 0; c < 4; ++c) {
        const auto& errs = summary.errors[c];
        for (std::size_t k = 0; k < errs.size(); ++k) {
          text += name;
          text += '.';
          text += k_channels[c];
          text += ',';
          text += std::to_string(k);
          text += ',';
          append_g17(text, errs[k]);
          text += '\n';
        }
      }
    }
    write_text(path, text);
    return;
  }
  nlohmann::ordered_json doc;
  doc["meta"] = {{"kind", "window_errors"}};
  auto& fits = doc["meta"]["fits"];
  for (const auto& [name, summary] : results) {
    nlohmann::ordered_json f;
    f["window"] = summary.spec.window;
    f["count"] = summary.spec.count;
    for (int c = 0; c < 4; ++c) {
      f[k_channels[c]] = {{"mu", summary.fits[c].mu}, {"sigma", summary.fits[c].sigma}};
    }
    fits[name] = std::move(f);
  }
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& [name, summary] : results) {
    for (int c = 0; c < 4; ++c) {
      const auto& errs = summary.errors[c];
      for (std::size_t k = 0; k < errs.size(); ++k) {
        rows.push_back({{"series", name + "." + k_channels[c]},
                        {"window", k},
                        {"value", errs[k]}});
      }
    }
  }
  write_text(path, doc.dump(2) + "\n");
}

}  // namespace pinode
