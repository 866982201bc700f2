#include "pinode/mlp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pinode/rng.hpp"

namespace pinode {

namespace {

void check_layer_sizes(std::span<const int> ls) {
  if (ls.size() < 2) {
    throw std::invalid_argument("layer_sizes needs at least an input and an output width");
  }
  for (int n : ls) {
    if (n < 1) throw std::invalid_argument("layer_sizes entries must be positive");
  }
}

}  // namespace

std::size_t mlp_param_count(std::span<const int> layer_sizes) {
  check_layer_sizes(layer_sizes);
  std::size_t total = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    total += static_cast<std::size_t>(layer_sizes[i + 1]) * (layer_sizes[i] + 1);
  }
  return total;
}

std::size_t MlpParams::param_count() const {
  return mlp_param_count(layer_sizes);
}

namespace {

// Shared flat indexing over per-layer (w, b) pairs.
template <class Layers>
auto& flat_ref(Layers& layers, std::size_t i) {
  for (auto& layer : layers) {
    if (i < layer.w.size()) return layer.w[i];
    i -= layer.w.size();
    if (i < layer.b.size()) return layer.b[i];
    i -= layer.b.size();
  }
  throw std::invalid_argument("flat parameter index out of range");
}

}  // namespace

double MlpParams::flat_get(std::size_t i) const { return flat_ref(layers, i); }
void MlpParams::flat_set(std::size_t i, double v) { flat_ref(layers, i) = v; }
double MlpTensor::flat_get(std::size_t i) const { return flat_ref(layers, i); }
void MlpTensor::flat_set(std::size_t i, double v) { flat_ref(layers, i) = v; }

std::size_t MlpTensor::count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

MlpParams mlp_zeros(std::vector<int> layer_sizes, double output_scale) {
  check_layer_sizes(layer_sizes);
  if (!(output_scale > 0.0) || !std::isfinite(output_scale)) {
    throw std::invalid_argument("output_scale must be positive and finite");
  }
  MlpParams p;
  p.layer_sizes = std::move(layer_sizes);
  p.output_scale = output_scale;
  for (std::size_t i = 0; i + 1 < p.layer_sizes.size(); ++i) {
    MlpLayer layer;
    layer.w.assign(static_cast<std::size_t>(p.layer_sizes[i + 1]) * p.layer_sizes[i], 0.0);
    layer.b.assign(p.layer_sizes[i + 1], 0.0);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams mlp_init(std::vector<int> layer_sizes, double output_scale,
                   std::uint64_t seed) {
  MlpParams p = mlp_zeros(std::move(layer_sizes), output_scale);
  Rng rng(seed);
  for (auto& layer : p.layers) {
    const double fan_in = static_cast<double>(layer.w.size() / layer.b.size());
    const double bound = 1.0 / std::sqrt(fan_in);
    for (double& w : layer.w) w = rng.uniform(-bound, bound);
  }
  return p;
}

MlpTensor zeros_like(const MlpParams& p) {
  MlpTensor t;
  for (const auto& layer : p.layers) {
    t.layers.push_back({std::vector<double>(layer.w.size(), 0.0),
                        std::vector<double>(layer.b.size(), 0.0)});
  }
  return t;
}

void validate(const MlpParams& p) {
  check_layer_sizes(p.layer_sizes);
  if (!(p.output_scale > 0.0) || !std::isfinite(p.output_scale)) {
    throw std::invalid_argument("output_scale must be positive and finite");
  }
  if (p.layers.size() + 1 != p.layer_sizes.size()) {
    throw std::invalid_argument("layer count does not match layer_sizes");
  }
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::size_t rows = p.layer_sizes[i + 1], cols = p.layer_sizes[i];
    if (p.layers[i].w.size() != rows * cols || p.layers[i].b.size() != rows) {
      throw std::invalid_argument("layer " + std::to_string(i) + " has wrong shape");
    }
    for (double v : p.layers[i].w) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite weight");
    }
    for (double v : p.layers[i].b) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite bias");
    }
  }
}

std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> input) {
  if (input.size() != static_cast<std::size_t>(p.layer_sizes.front())) {
    throw std::invalid_argument("mlp_forward: input width " + std::to_string(input.size()) +
                                " does not match layer_sizes[0]=" +
                                std::to_string(p.layer_sizes.front()));
  }
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const MlpLayer& layer = p.layers[li];
    const std::size_t rows = layer.b.size(), cols = cur.size();
    next.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = layer.b[i];
      const double* w = &layer.w[i * cols];
      for (std::size_t j = 0; j < cols; ++j) acc += w[j] * cur[j];
      next[i] = acc;
    }
    const bool last = li + 1 == p.layers.size();
    for (double& v : next) v = last ? p.output_scale * std::tanh(v) : (v > 0.0 ? v : 0.0);
    cur.swap(next);
  }
  return cur;
}

TapedMlp bind(ad::Tape& tape, const MlpParams& p) {
  TapedMlp net;
  net.tape = &tape;
  net.params = &p;
  for (const auto& layer : p.layers) {
    net.w_start.push_back(tape.leaf_block(layer.w));
    net.b_start.push_back(tape.leaf_block(layer.b));
  }
  return net;
}

std::vector<ad::Var> mlp_forward(const TapedMlp& net, std::span<const ad::Var> input) {
  const MlpParams& p = *net.params;
  if (input.size() != static_cast<std::size_t>(p.layer_sizes.front())) {
    throw std::invalid_argument("mlp_forward: input width does not match layer_sizes[0]");
  }
  ad::Tape& tape = *net.tape;
  int cur = tape.pack(input);
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const int rows = p.layer_sizes[li + 1], cols = p.layer_sizes[li];
    const int z = tape.affine(net.w_start[li], net.b_start[li], cur, rows, cols);
    if (li + 1 == p.layers.size()) {
      cur = tape.scale_block(tape.tanh_block(z, rows), rows, p.output_scale);
    } else {
      cur = tape.relu_block(z, rows);
    }
  }
  std::vector<ad::Var> out;
  out.reserve(p.layer_sizes.back());
  for (int i = 0; i < p.layer_sizes.back(); ++i) out.push_back(tape.view(cur + i));
  return out;
}

MlpTensor extract_gradients(const TapedMlp& net) {
  MlpTensor g = zeros_like(*net.params);
  const ad::Tape& tape = *net.tape;
  for (std::size_t li = 0; li < g.layers.size(); ++li) {
    auto& layer = g.layers[li];
    for (std::size_t k = 0; k < layer.w.size(); ++k) {
      layer.w[k] = tape.adjoint(net.w_start[li] + static_cast<int>(k));
    }
    for (std::size_t k = 0; k < layer.b.size(); ++k) {
      layer.b[k] = tape.adjoint(net.b_start[li] + static_cast<int>(k));
    }
  }
  return g;
}

MlpTensor gradient(const MlpParams& p, const ScalarFn& fn) {
  ad::Tape tape;
  TapedMlp net = bind(tape, p);
  ad::Var loss = fn(tape, net);
  tape.backward(loss);
  MlpTensor g = extract_gradients(net);
  for (const auto& layer : g.layers) {
    for (double v : layer.w) {
      if (!std::isfinite(v)) throw numeric_error("gradient: non-finite weight derivative");
    }
    for (double v : layer.b) {
      if (!std::isfinite(v)) throw numeric_error("gradient: non-finite bias derivative");
    }
  }
  return g;
}

double gradient_check(const MlpParams& p, const ScalarFn& fn, double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1e-3) {
    throw std::invalid_argument("epsilon must lie in (0, 1e-3]");
  }
  const MlpTensor analytic = gradient(p, fn);
  MlpParams work = p;
  const std::size_t n = p.param_count();

  const auto eval = [&](const MlpParams& q) {
    ad::Tape tape;
    TapedMlp net = bind(tape, q);
    return fn(tape, net).value();
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double saved = work.flat_get(i);
    work.flat_set(i, saved + epsilon);
    const double up = eval(work);
    work.flat_set(i, saved - epsilon);
    const double dn = eval(work);
    work.flat_set(i, saved);
    if (!std::isfinite(up) || !std::isfinite(dn)) {
      throw numeric_error("gradient_check: non-finite evaluation");
    }
    const double numeric = (up - dn) / (2.0 * epsilon);
    const double a = analytic.flat_get(i);
    const double denom = std::max({1.0, std::fabs(a), std::fabs(numeric)});
    worst = std::max(worst, std::fabs(a - numeric) / denom);
  }
  return worst;
}

// ---- persistence -----------------------------------------------------—--

std::string mlp_to_json(const MlpParams& p) {
  nlohmann::ordered_json doc;
  doc["layer_sizes"] = p.layer_sizes;
  doc["output_scale"] = p.output_scale;
  auto& layers = doc["layers"] = nlohmann::ordered_json::array();
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const auto& layer = p.layers[li];
    const std::size_t rows = layer.b.size(), cols = p.layer_sizes[li];
    nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rows; ++i) {
      rows_json.push_back(std::vector<double>(layer.w.begin() + i * cols,
                                              layer.w.begin() + (i + 1) * cols));
    }
    layers.push_back({{"w", std::move(rows_json)}, {"b", layer.b}});
  }
  return doc.dump(2);
}

MlpParams mlp_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(std::string("model JSON: ") + e.what());
  }
  try {
    MlpParams p;
    p.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
    p.output_scale = doc.at("output_scale").get<double>();
    for (const auto& layer_json : doc.at("layers")) {
      MlpLayer layer;
      for (const auto& row : layer_json.at("w")) {
        for (const auto& v : row) layer.w.push_back(v.get<double>());
      }
      layer.b = layer_json.at("b").get<std::vector<double>>();
      p.layers.push_back(std::move(layer));
    }
    validate(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("model JSON: ") + e.what());
  }
}

void save_mlp(const MlpParams& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << mlp_to_json(p) << '\n';
  if (!out) throw io_error("failed writing " + path.string());
}

MlpParams load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return mlp_from_json(buf.str());
}

}  // namespace pinode
