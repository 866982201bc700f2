#include "pinode/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "pinode/rng.hpp"

namespace pinode {

void validate(const RigConfig& cfg, double sample_rate) {
  validate(cfg.base);
  if (cfg.mu_c_pos < 0.0 || cfg.mu_c_neg < 0.0 || cfg.drag_coeff < 0.0) {
    throw std::invalid_argument("rig friction and drag factors must be non-negative");
  }
  if (cfg.actuator_tau < 0.0) {
    throw std::invalid_argument("actuator_tau must be non-negative");
  }
  if (cfg.noise_x < 0.0 || cfg.noise_phi < 0.0) {
    throw std::invalid_argument("noise stds must be non-negative");
  }
  if (!(cfg.track_half_length > 0.0)) {
    throw std::invalid_argument("track_half_length must be positive");
  }
  if (!(sample_rate > 0.0) || !(cfg.inner_step > 0.0)) {
    throw std::invalid_argument("sample_rate and inner_step must be positive");
  }
  const double dt = 1.0 / sample_rate;
  const double substeps = dt / cfg.inner_step;
  if (std::fabs(substeps - std::round(substeps)) > 1e-9 * substeps || substeps < 0.5) {
    throw std::invalid_argument("inner_step must divide the sample interval");
  }
}

void validate(const Dataset& d) {
  if (!(d.sample_rate > 0.0)) {
    throw std::invalid_argument("sample_rate must be positive");
  }
  const double dt = 1.0 / d.sample_rate;
  for (std::size_t i = 1; i < d.samples.size(); ++i) {
    const double gap = d.samples[i].t - d.samples[i - 1].t;
    if (!(gap > 0.0) || std::fabs(gap - dt) > 1e-6 * dt) {
      throw std::invalid_argument("timestamps must increase uniformly at 1/sample_rate (row " +
                                  std::to_string(i) + ")");
    }
  }
}

std::vector<double> excitation_signal(double duration, double sample_rate,
                                      double amplitude, std::uint64_t seed) {
  if (!(duration > 0.0) || !(sample_rate > 0.0)) {
    throw std::invalid_argument("duration and sample_rate must be positive");
  }
  if (amplitude < 0.0) {
    throw std::invalid_argument("amplitude must be non-negative");
  }
  const std::size_t n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  Rng rng(seed);
  std::vector<double> raw(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    const auto hold = static_cast<std::size_t>(
        std::max(1.0, std::round(rng.uniform(0.1, 0.5) * sample_rate)));
    const double level = rng.uniform(-amplitude, amplitude);
    for (std::size_t k = i; k < std::min(i + hold, n); ++k) raw[k] = level;
    i += hold;
  }
  // centered 3-sample moving average, edges clamped
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = raw[k == 0 ? 0 : k - 1];
    const double b = raw[k];
    const double c = raw[std::min(k + 1, n - 1)];
    out[k] = (a + b + c) / 3.0;
  }
  return out;
}

RigRun simulate_rig(const RigConfig& cfg, std::span<const double> excitation,
                    const State& z0, double sample_rate, std::uint64_t seed) {
  (void)seed;
  validate(cfg, sample_rate);
  if (excitation.empty()) {
    throw std::invalid_argument("simulate_rig: excitation must be non-empty");
  }
  const DerivedConstants dc(cfg.base);
  const double dt = 1.0 / sample_rate;
  const auto substeps = static_cast<int>(std::llround(dt / cfg.inner_step));
  const double h = cfg.inner_step;

  RigRun run;
  run.states.reserve(excitation.size() + 1);
  run.applied_u.reserve(excitation.size());
  run.states.push_back(z0);

  // Extended state: [x, phi, x_dot, phi_dot] plus the lagged actuator force.
  std::array<double, 4> z = to_array(z0);
  double u_lag = 0.0;

  for (std::size_t k = 0; k < excitation.size(); ++k) {
    const double u_cmd = excitation[k] - cfg.centering_stiffness * z[0] -
                         cfg.centering_damping * z[2];
    run.applied_u.push_back(u_cmd);
    for (int s = 0; s < substeps; ++s) {
      const double t = (static_cast<double>(k) + static_cast<double>(s) / substeps) * dt;
      const auto deriv = [&](double, const std::array<double, 5>& zs) {
        const double xd = zs[2], phid = zs[3], ul = zs[4];
        const double mu = xd > 0.0 ? cfg.mu_c_pos : (xd < 0.0 ? cfg.mu_c_neg : 0.0);
        const double sign = xd > 0.0 ? 1.0 : (xd < 0.0 ? -1.0 : 0.0);
        const double u_eff = cfg.actuator_tau > 0.0 ? ul : u_cmd;
        const double fx = u_eff - dc.m_tot * dc.g * mu * sign;
        const double fphi = -cfg.base.mu_p * phid - cfg.drag_coeff * phid * std::fabs(phid);
        const std::array<double, 4> z4{zs[0], zs[1], zs[2], zs[3]};
        const std::array<double, 2> acc = accel_from_forces(dc, z4, fx, fphi);
        const double dul = cfg.actuator_tau > 0.0 ? (u_cmd - ul) / cfg.actuator_tau : 0.0;
        return std::array<double, 5>{xd, phid, acc[0], acc[1], dul};
      };
      // RK4 on the 5-component extended state
      std::array<double, 5> ze{z[0], z[1], z[2], z[3], u_lag};
      const auto k1 = deriv(t, ze);
      std::array<double, 5> tmp;
      for (int i = 0; i < 5; ++i) tmp[i] = ze[i] + 0.5 * h * k1[i];
      const auto k2 = deriv(t + h / 2, tmp);
      for (int i = 0; i < 5; ++i) tmp[i] = ze[i] + 0.5 * h * k2[i];
      const auto k3 = deriv(t + h / 2, tmp);
      for (int i = 0; i < 5; ++i) tmp[i] = ze[i] + h * k3[i];
      const auto k4 = deriv(t + h, tmp);
      for (int i = 0; i < 5; ++i) {
        ze[i] += h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
        if (!std::isfinite(ze[i])) {
          throw numeric_error("simulate_rig: non-finite state at t=" + std::to_string(t));
        }
      }
      z = {ze[0], ze[1], ze[2], ze[3]};
      u_lag = ze[4];
      // rails: inelastic stop
      if (z[0] > cfg.track_half_length) {
        z[0] = cfg.track_half_length;
        z[2] = 0.0;
      } else if (z[0] < -cfg.track_half_length) {
        z[0] = -cfg.track_half_length;
        z[2] = 0.0;
      }
    }
    run.states.push_back(to_state(z));
  }
  return run;
}

Dataset sensor_model(const RigRun& truth, const RigConfig& cfg, double sample_rate,
                     std::uint64_t seed) {
  validate(cfg, sample_rate);
  const std::size_t n = truth.states.size();
  if (n == 0) throw std::invalid_argument("sensor_model: empty trajectory");
  Rng rng(seed);
  std::vector<double> xs(n), phis(n);
  for (std::size_t i = 0; i < n; ++i) {
    // draw in a fixed order regardless of which stds are zero
    const double ex = rng.normal(), ephi = rng.normal();
    xs[i] = truth.states[i].x + cfg.noise_x * ex;
    phis[i] = truth.states[i].phi + cfg.noise_phi * ephi;
  }
  Dataset d;
  d.sample_rate = sample_rate;
  d.samples.resize(n);
  const double dt = 1.0 / sample_rate;
  for (std::size_t i = 0; i < n; ++i) {
    Sample& s = d.samples[i];
    s.t = static_cast<double>(i) * dt;
    s.x = xs[i];
    // velocities from the unwrapped noisy sequence; wrapping happens last so
    // no finite difference ever crosses a 2pi jump
    s.x_dot = i == 0 ? 0.0 : (xs[i] - xs[i - 1]) * sample_rate;
    s.phi_dot = i == 0 ? 0.0 : (phis[i] - phis[i - 1]) * sample_rate;
    s.phi = ad::wrap_two_pi(phis[i]);
    s.u = i < truth.applied_u.size() ? truth.applied_u[i] : 0.0;
  }
  return d;
}

namespace {

ChannelStats channel_stats(const std::vector<double>& v) {
  double mean = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    mean += x;
    mn = std::min(mn, x);
    mx = std::max(mx, x);
  }
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {mean, std::sqrt(var), mn, mx};
}

}  // namespace

DatasetStats dataset_stats(const Dataset& d) {
  if (d.samples.empty()) throw std::invalid_argument("dataset_stats: empty dataset");
  const std::size_t n = d.samples.size();
  std::vector<double> col(n);
  DatasetStats out;
  out.count = n;
  out.sample_rate = d.sample_rate;
  const auto fill = [&](auto member) {
    for (std::size_t i = 0; i < n; ++i) col[i] = d.samples[i].*member;
    return channel_stats(col);
  };
  out.x = fill(&Sample::x);
  out.phi = fill(&Sample::phi);
  out.x_dot = fill(&Sample::x_dot);
  out.phi_dot = fill(&Sample::phi_dot);
  out.u = fill(&Sample::u);
  return out;
}

std::string format_stats(const DatasetStats& s) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "Sample rate  %g Hz\nSamples      %zu\n", s.sample_rate,
                s.count);
  out += line;
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s\n", "", "Mean", "STD.", "Min",
                "Max");
  out += line;
  const auto row = [&](const char* name, const ChannelStats& c) {
    std::snprintf(line, sizeof line, "%-16s %10.3f %10.3f %10.3f %10.3f\n", name, c.mean,
                  c.stdev, c.min, c.max);
    out += line;
  };
  row("x (m)", s.x);
  row("phi (rad)", s.phi);
  row("x_dot (m/s)", s.x_dot);
  row("phi_dot (rad/s)", s.phi_dot);
  row("u (N)", s.u);
  return out;
}

// ---- CSV -------------------------------------------------------------—--

namespace {

constexpr const char* k_header = "t,x,phi,x_dot,phi_dot,u";

void append_value(std::string& out, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

double parse_field(std::string_view text, long line_no, const char* column) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw parse_error(std::string("cannot parse column '") + column + "' from '" +
                          std::string(text) + "'",
                      line_no);
  }
  return v;
}

}  // namespace

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  std::string text;
  text.reserve(d.samples.size() * 96 + 256);
  if (!d.provenance.empty()) {
    std::istringstream prov(d.provenance);
    std::string pline;
    while (std::getline(prov, pline)) {
      text += "# ";
      text += pline;
      text += '\n';
    }
  }
  text += k_header;
  text += '\n';
  for (const Sample& s : d.samples) {
    append_value(text, s.t);
    text += ',';
    append_value(text, s.x);
    text += ',';
    append_value(text, s.phi);
    text += ',';
    append_value(text, s.x_dot);
    text += ',';
    append_value(text, s.phi_dot);
    text += ',';
    append_value(text, s.u);
    text += '\n';
  }
  out << text;
  if (!out) throw io_error("failed writing " + path.string());
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  Dataset d;
  std::string prov;
  std::string line;
  long line_no = 0;
  bool saw_header = false;
  static constexpr const char* k_columns[6] = {"t", "x", "phi", "x_dot", "phi_dot", "u"};
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body(line);
      body.remove_prefix(1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      if (!prov.empty()) prov += '\n';
      prov += body;
      continue;
    }
    if (!saw_header) {
      if (line != k_header) {
        // name the first column that deviates
        std::istringstream got(line), want(k_header);
        std::string g, w;
        int idx = 0;
        while (std::getline(want, w, ',')) {
          if (!std::getline(got, g, ',') || g != w) {
            throw parse_error("missing or misnamed column '" + w + "'", line_no);
          }
          ++idx;
        }
        throw parse_error("unexpected header '" + line + "'", line_no);
      }
      saw_header = true;
      continue;
    }
    Sample s{};
    double* fields[6] = {&s.t, &s.x, &s.phi, &s.x_dot, &s.phi_dot, &s.u};
    std::size_t start = 0;
    for (int f = 0; f < 6; ++f) {
      const std::size_t end = f == 5 ? line.size() : line.find(',', start);
      if (end == std::string::npos) {
        throw parse_error(std::string("missing column '") + k_columns[f] + "'", line_no);
      }
      *fields[f] = parse_field(std::string_view(line).substr(start, end - start), line_no,
                               k_columns[f]);
      start = end + 1;
    }
    d.samples.push_back(s);
  }
  if (!saw_header) throw parse_error("missing header row", line_no);
  d.provenance = prov;
  if (d.samples.size() >= 2) {
    const double dt = d.samples[1].t - d.samples[0].t;
    if (!(dt > 0.0)) throw std::invalid_argument("timestamps must increase");
    d.sample_rate = 1.0 / dt;
  }
  validate(d);
  return d;
}

}  // namespace pinode
