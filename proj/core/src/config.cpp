#include "pinode/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace pinode {

void validate(const RunConfig& cfg) {
  if (!(cfg.sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be positive");
  validate(cfg.physical);
  validate(cfg.rig, cfg.sample_rate);
  validate(cfg.training);
  if (cfg.network.layer_sizes.size() < 2) {
    throw std::invalid_argument("network.layer_sizes needs at least two entries");
  }
  if (!(cfg.network.output_scale > 0.0)) {
    throw std::invalid_argument("network.output_scale must be positive");
  }
  if (!(cfg.generate.duration > 0.0)) {
    throw std::invalid_argument("generate.duration must be positive");
  }
  if (cfg.generate.amplitude < 0.0) {
    throw std::invalid_argument("generate.amplitude must be non-negative");
  }
  if (cfg.evaluation.window < 1 || cfg.evaluation.count < 1) {
    throw std::invalid_argument("evaluation.window and count must be >= 1");
  }
  if (cfg.evaluation.rollout_start < 0 || cfg.evaluation.rollout_steps < 0) {
    throw std::invalid_argument("evaluation rollout window must be non-negative");
  }
}

namespace {

struct Value {
  enum Kind { number, boolean, text, list } kind;
  double num = 0.0;
  bool flag = false;
  std::string str;
  std::vector<double> items;
};

Value parse_value(std::string_view raw, long line_no) {
  // strip trailing comment and whitespace
  const auto trim = [](std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) {
      v.remove_suffix(1);
    }
    return v;
  };
  raw = trim(raw);
  if (raw.empty()) throw parse_error("missing value", line_no);
  Value v{};
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw parse_error("unterminated string", line_no);
    v.kind = Value::text;
    v.str = std::string(raw.substr(1, raw.size() - 2));
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::boolean;
    v.flag = raw == "true";
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') throw parse_error("unterminated list", line_no);
    v.kind = Value::list;
    std::string_view body = raw.substr(1, raw.size() - 2);
    while (true) {
      body = trim(body);
      if (body.empty()) break;
      const std::size_t comma = body.find(',');
      const std::string_view item = trim(body.substr(0, comma));
      double d = 0.0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), d);
      if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
        throw parse_error("cannot parse list item '" + std::string(item) + "'", line_no);
      }
      v.items.push_back(d);
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    return v;
  }
  v.kind = Value::number;
  const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v.num);
  if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size()) {
    throw parse_error("cannot parse value '" + std::string(raw) + "'", line_no);
  }
  return v;
}

using Setter = std::function<void(RunConfig&, const Value&, long)>;

double need_number(const Value& v, long line_no) {
  if (v.kind != Value::number) throw parse_error("expected a number", line_no);
  return v.num;
}

Setter set_double(std::function<double&(RunConfig&)> field) {
  return [field](RunConfig& c, const Value& v, long ln) { field(c) = need_number(v, ln); };
}

Setter set_int(std::function<int&(RunConfig&)> field) {
  return [field](RunConfig& c, const Value& v, long ln) {
    const double d = need_number(v, ln);
    if (d != std::floor(d)) throw parse_error("expected an integer", ln);
    field(c) = static_cast<int>(d);
  };
}

Setter set_bool(std::function<bool&(RunConfig&)> field) {
  return [field](RunConfig& c, const Value& v, long ln) {
    if (v.kind != Value::boolean) throw parse_error("expected true or false", ln);
    field(c) = v.flag;
  };
}

Setter set_string(std::function<std::string&(RunConfig&)> field) {
  return [field](RunConfig& c, const Value& v, long ln) {
    if (v.kind != Value::text) throw parse_error("expected a quoted string", ln);
    field(c) = v.str;
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["seed"] = [](RunConfig& c, const Value& v, long ln) {
      const double d = need_number(v, ln);
      if (d < 0 || d != std::floor(d)) throw parse_error("seed must be a non-negative integer", ln);
      c.seed = static_cast<std::uint64_t>(d);
    };
    t["sample_rate"] = set_double([](RunConfig& c) -> double& { return c.sample_rate; });

    t["physical.m_c"] = set_double([](RunConfig& c) -> double& { return c.physical.m_c; });
    t["physical.m_p"] = set_double([](RunConfig& c) -> double& { return c.physical.m_p; });
    t["physical.m_s"] = set_double([](RunConfig& c) -> double& { return c.physical.m_s; });
    t["physical.l"] = set_double([](RunConfig& c) -> double& { return c.physical.l; });
    t["physical.mu_c"] = set_double([](RunConfig& c) -> double& { return c.physical.mu_c; });
    t["physical.mu_p"] = set_double([](RunConfig& c) -> double& { return c.physical.mu_p; });
    t["physical.g"] = set_double([](RunConfig& c) -> double& { return c.physical.g; });

    t["rig.mu_c_pos"] = set_double([](RunConfig& c) -> double& { return c.rig.mu_c_pos; });
    t["rig.mu_c_neg"] = set_double([](RunConfig& c) -> double& { return c.rig.mu_c_neg; });
    t["rig.actuator_tau"] = set_double([](RunConfig& c) -> double& { return c.rig.actuator_tau; });
    t["rig.drag_coeff"] = set_double([](RunConfig& c) -> double& { return c.rig.drag_coeff; });
    t["rig.noise_x"] = set_double([](RunConfig& c) -> double& { return c.rig.noise_x; });
    t["rig.noise_phi"] = set_double([](RunConfig& c) -> double& { return c.rig.noise_phi; });
    t["rig.track_half_length"] =
        set_double([](RunConfig& c) -> double& { return c.rig.track_half_length; });
    t["rig.inner_step"] = set_double([](RunConfig& c) -> double& { return c.rig.inner_step; });
    t["rig.centering_stiffness"] =
        set_double([](RunConfig& c) -> double& { return c.rig.centering_stiffness; });
    t["rig.centering_damping"] =
        set_double([](RunConfig& c) -> double& { return c.rig.centering_damping; });

    t["generate.duration"] = set_double([](RunConfig& c) -> double& { return c.generate.duration; });
    t["generate.amplitude"] =
        set_double([](RunConfig& c) -> double& { return c.generate.amplitude; });
    t["generate.x0"] = set_double([](RunConfig& c) -> double& { return c.generate.z0.x; });
    t["generate.phi0"] = set_double([](RunConfig& c) -> double& { return c.generate.z0.phi; });
    t["generate.x_dot0"] = set_double([](RunConfig& c) -> double& { return c.generate.z0.x_dot; });
    t["generate.phi_dot0"] =
        set_double([](RunConfig& c) -> double& { return c.generate.z0.phi_dot; });

    t["network.layer_sizes"] = [](RunConfig& c, const Value& v, long ln) {
      if (v.kind != Value::list || v.items.size() < 2) {
        throw parse_error("layer_sizes must be a list of at least two integers", ln);
      }
      c.network.layer_sizes.clear();
      for (double d : v.items) {
        if (d < 1 || d != std::floor(d)) throw parse_error("layer sizes must be positive integers", ln);
        c.network.layer_sizes.push_back(static_cast<int>(d));
      }
    };
    t["network.output_scale"] =
        set_double([](RunConfig& c) -> double& { return c.network.output_scale; });

    t["training.learning_rate"] =
        set_double([](RunConfig& c) -> double& { return c.training.learning_rate; });
    t["training.batch_size"] = set_int([](RunConfig& c) -> int& { return c.training.batch_size; });
    t["training.epochs"] = set_int([](RunConfig& c) -> int& { return c.training.epochs; });
    t["training.horizon"] = set_int([](RunConfig& c) -> int& { return c.training.horizon; });
    t["training.lambda_q"] = [](RunConfig& c, const Value& v, long ln) {
      if (v.kind != Value::list || v.items.size() != 2) {
        throw parse_error("lambda_q must be a list of two numbers", ln);
      }
      c.training.loss_weights.lambda_q = {v.items[0], v.items[1]};
    };
    t["training.lambda_qdot"] = [](RunConfig& c, const Value& v, long ln) {
      if (v.kind != Value::list || v.items.size() != 2) {
        throw parse_error("lambda_qdot must be a list of two numbers", ln);
      }
      c.training.loss_weights.lambda_qdot = {v.items[0], v.items[1]};
    };

    t["evaluation.window"] = set_int([](RunConfig& c) -> int& { return c.evaluation.window; });
    t["evaluation.count"] = set_int([](RunConfig& c) -> int& { return c.evaluation.count; });
    t["evaluation.mode"] = [](RunConfig& c, const Value& v, long ln) {
      if (v.kind != Value::text) throw parse_error("mode must be a string", ln);
      if (v.str == "terminal") {
        c.evaluation.mode = ErrorMode::terminal;
      } else if (v.str == "averaged") {
        c.evaluation.mode = ErrorMode::averaged;
      } else {
        throw parse_error("mode must be \"terminal\" or \"averaged\"", ln);
      }
    };
    t["evaluation.tiled"] = set_bool([](RunConfig& c) -> bool& { return c.evaluation.tiled; });
    t["evaluation.rollout_start"] =
        set_int([](RunConfig& c) -> int& { return c.evaluation.rollout_start; });
    t["evaluation.rollout_steps"] =
        set_int([](RunConfig& c) -> int& { return c.evaluation.rollout_steps; });

    t["paths.dataset"] = set_string([](RunConfig& c) -> std::string& { return c.paths.dataset; });
    t["paths.model"] = set_string([](RunConfig& c) -> std::string& { return c.paths.model; });
    t["paths.report"] = set_string([](RunConfig& c) -> std::string& { return c.paths.report; });
    t["paths.plots"] = set_string([](RunConfig& c) -> std::string& { return c.paths.plots; });
    return t;
  }();
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  RunConfig cfg = base;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v(line);
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    if (const std::size_t hash = v.find('#'); hash != std::string_view::npos) {
      v = v.substr(0, hash);
    }
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) {
      v.remove_suffix(1);
    }
    if (v.empty()) continue;
    if (v.front() == '[') {
      if (v.back() != ']') throw parse_error("unterminated section header", line_no);
      section = std::string(v.substr(1, v.size() - 2));
      continue;
    }
    const std::size_t eq = v.find('=');
    if (eq == std::string_view::npos) throw parse_error("expected key = value", line_no);
    std::string_view key = v.substr(0, eq);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.remove_suffix(1);
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    const auto it = setters().find(full);
    if (it == setters().end()) {
      throw parse_error("unknown configuration key '" + full + "'", line_no);
    }
    it->second(cfg, parse_value(v.substr(eq + 1), line_no), line_no);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), base);
}

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string dump_config(const RunConfig& c) {
  std::ostringstream o;
  o << "seed = " << c.seed << "\n";
  o << "sample_rate = " << g17(c.sample_rate) << "\n\n";
  o << "[physical]\n";
  o << "m_c = " << g17(c.physical.m_c) << "\nm_p = " << g17(c.physical.m_p) << "\nm_s = "
    << g17(c.physical.m_s) << "\nl = " << g17(c.physical.l) << "\nmu_c = "
    << g17(c.physical.mu_c) << "\nmu_p = " << g17(c.physical.mu_p) << "\ng = "
    << g17(c.physical.g) << "\n\n";
  o << "[rig]\n";
  o << "mu_c_pos = " << g17(c.rig.mu_c_pos) << "\nmu_c_neg = " << g17(c.rig.mu_c_neg)
    << "\nactuator_tau = " << g17(c.rig.actuator_tau) << "\ndrag_coeff = "
    << g17(c.rig.drag_coeff) << "\nnoise_x = " << g17(c.rig.noise_x) << "\nnoise_phi = "
    << g17(c.rig.noise_phi) << "\ntrack_half_length = " << g17(c.rig.track_half_length)
    << "\ninner_step = " << g17(c.rig.inner_step) << "\ncentering_stiffness = "
    << g17(c.rig.centering_stiffness) << "\ncentering_damping = "
    << g17(c.rig.centering_damping) << "\n\n";
  o << "[generate]\n";
  o << "duration = " << g17(c.generate.duration) << "\namplitude = "
    << g17(c.generate.amplitude) << "\nx0 = " << g17(c.generate.z0.x) << "\nphi0 = "
    << g17(c.generate.z0.phi) << "\nx_dot0 = " << g17(c.generate.z0.x_dot)
    << "\nphi_dot0 = " << g17(c.generate.z0.phi_dot) << "\n\n";
  o << "[network]\n";
  o << "layer_sizes = [";
  for (std::size_t i = 0; i < c.network.layer_sizes.size(); ++i) {
    o << (i ? ", " : "") << c.network.layer_sizes[i];
  }
  o << "]\noutput_scale = " << g17(c.network.output_scale) << "\n\n";
  o << "[training]\n";
  o << "learning_rate = " << g17(c.training.learning_rate) << "\nbatch_size = "
    << c.training.batch_size << "\nepochs = " << c.training.epochs << "\nhorizon = "
    << c.training.horizon << "\nlambda_q = [" << g17(c.training.loss_weights.lambda_q[0])
    << ", " << g17(c.training.loss_weights.lambda_q[1]) << "]\nlambda_qdot = ["
    << g17(c.training.loss_weights.lambda_qdot[0]) << ", "
    << g17(c.training.loss_weights.lambda_qdot[1]) << "]\n\n";
  o << "[evaluation]\n";
  o << "window = " << c.evaluation.window << "\ncount = " << c.evaluation.count
    << "\nmode = \"" << (c.evaluation.mode == ErrorMode::terminal ? "terminal" : "averaged")
    << "\"\ntiled = " << (c.evaluation.tiled ? "true" : "false") << "\nrollout_start = "
    << c.evaluation.rollout_start << "\nrollout_steps = " << c.evaluation.rollout_steps
    << "\n\n";
  o << "[paths]\n";
  o << "dataset = \"" << c.paths.dataset << "\"\nmodel = \"" << c.paths.model
    << "\"\nreport = \"" << c.paths.report << "\"\nplots = \"" << c.paths.plots << "\"\n";
  return o.str();
}

std::string config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["sample_rate"] = c.sample_rate;
  j["physical"] = {{"m_c", c.physical.m_c}, {"m_p", c.physical.m_p}, {"m_s", c.physical.m_s},
                   {"l", c.physical.l},     {"mu_c", c.physical.mu_c},
                   {"mu_p", c.physical.mu_p}, {"g", c.physical.g}};
  j["rig"] = {{"mu_c_pos", c.rig.mu_c_pos},
              {"mu_c_neg", c.rig.mu_c_neg},
              {"actuator_tau", c.rig.actuator_tau},
              {"drag_coeff", c.rig.drag_coeff},
              {"noise_x", c.rig.noise_x},
              {"noise_phi", c.rig.noise_phi},
              {"track_half_length", c.rig.track_half_length},
              {"inner_step", c.rig.inner_step},
              {"centering_stiffness", c.rig.centering_stiffness},
              {"centering_damping", c.rig.centering_damping}};
  j["generate"] = {{"duration", c.generate.duration},
                   {"amplitude", c.generate.amplitude},
                   {"x0", c.generate.z0.x},
                   {"phi0", c.generate.z0.phi},
                   {"x_dot0", c.generate.z0.x_dot},
                   {"phi_dot0", c.generate.z0.phi_dot}};
  j["network"] = {{"layer_sizes", c.network.layer_sizes},
                  {"output_scale", c.network.output_scale}};
  j["training"] = {{"learning_rate", c.training.learning_rate},
                   {"batch_size", c.training.batch_size},
                   {"epochs", c.training.epochs},
                   {"horizon", c.training.horizon},
                   {"lambda_q", c.training.loss_weights.lambda_q},
                   {"lambda_qdot", c.training.loss_weights.lambda_qdot}};
  j["evaluation"] = {{"window", c.evaluation.window},
                     {"count", c.evaluation.count},
                     {"mode", c.evaluation.mode == ErrorMode::terminal ? "terminal" : "averaged"},
                     {"tiled", c.evaluation.tiled},
                     {"rollout_start", c.evaluation.rollout_start},
                     {"rollout_steps", c.evaluation.rollout_steps}};
  j["paths"] = {{"dataset", c.paths.dataset},
                {"model", c.paths.model},
                {"report", c.paths.report},
                {"plots", c.paths.plots}};
  return j.dump(2);
}

}  // namespace pinode
