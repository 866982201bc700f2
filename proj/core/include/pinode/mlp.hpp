#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pinode/ad.hpp"

namespace pinode {

struct MlpLayer {
  std::vector<double> w;  // row-major, rows = outputs, cols = inputs
  std::vector<double> b;
};

// Dense multilayer perceptron: relu on hidden layers, tanh on the output,
// then a fixed output_scale multiplier. output_scale bounds the force the
// network can emit and is not trainable.
struct MlpParams {
  std::vector<int> layer_sizes;  // input width first, output width last
  std::vector<MlpLayer> layers;  // layer_sizes.size() - 1 entries
  double output_scale = 1.0;

  // Trainable scalar count: sum over layers of out*(in+1).
  std::size_t param_count() const;

  // Flat parameter order: layer 0 weights row-major, layer 0 biases,
  // layer 1 weights, ... Used by the optimizer and gradient checks.
  double flat_get(std::size_t i) const;
  void flat_set(std::size_t i, double v);
};

std::size_t mlp_param_count(std::span<const int> layer_sizes);

// Weights uniform in (-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero.
// Deterministic per seed.
MlpParams mlp_init(std::vector<int> layer_sizes, double output_scale,
                   std::uint64_t seed);

// All-zero weights and biases (useful as a neutral hybrid model).
MlpParams mlp_zeros(std::vector<int> layer_sizes, double output_scale);

void validate(const MlpParams& p);

std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> input);

// Gradients (and Adam moments) share the layer shapes of MlpParams.
struct MlpTensor {
  std::vector<MlpLayer> layers;
  double flat_get(std::size_t i) const;
  void flat_set(std::size_t i, double v);
  std::size_t count() const;
};
MlpTensor zeros_like(const MlpParams& p);

// ---- taped evaluation ----------------------------------------------------

// Network parameters bound onto a tape as leaves; forward passes through it
// record block ops so the whole step stays differentiable.
struct TapedMlp {
  ad::Tape* tape = nullptr;
  const MlpParams* params = nullptr;
  std::vector<int> w_start;  // leaf block per layer
  std::vector<int> b_start;
};

TapedMlp bind(ad::Tape& tape, const MlpParams& p);
std::vector<ad::Var> mlp_forward(const TapedMlp& net, std::span<const ad::Var> input);

// Reads d(loss)/d(theta) out of the tape after backward().
MlpTensor extract_gradients(const TapedMlp& net);

// A differentiable scalar function of the network parameters, expressed in
// tape operations.
using ScalarFn = std::function<ad::Var(ad::Tape&, const TapedMlp&)>;

// Exact reverse-mode gradient of fn at p.
MlpTensor gradient(const MlpParams& p, const ScalarFn& fn);

// Central-difference check of gradient() over every scalar parameter;
// returns max over parameters of |analytic - numeric| / max(1, |a|, |n|).
// epsilon must lie in (0, 1e-3].
double gradient_check(const MlpParams& p, const ScalarFn& fn, double epsilon);

// ---- persistence -----------------------------------------------------—--

// JSON document {"layer_sizes": [...], "output_scale": s,
// "layers": [{"w": [[...]], "b": [...]}, ...]}; value-exact round trip.
std::string mlp_to_json(const MlpParams& p);
MlpParams mlp_from_json(const std::string& text);
void save_mlp(const MlpParams& p, const std::filesystem::path& path);
MlpParams load_mlp(const std::filesystem::path& path);

}  // namespace pinode
