#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "pinode/datagen.hpp"
#include "pinode/evaluation.hpp"
#include "pinode/training.hpp"

namespace pinode {

struct NetworkConfig {
  std::vector<int> layer_sizes{5, 50, 50, 50, 1};
  double output_scale = 10.0;
};

struct GenerateConfig {
  double duration = 480.0;  // s
  double amplitude = 0.6;   // N
  State z0{0.0, std::numbers::pi, 0.0, 0.0};  // start hanging at rest
};

struct EvalConfig {
  int window = 30;
  int count = 1000;
  ErrorMode mode = ErrorMode::terminal;
  bool tiled = false;
  int rollout_start = 0;
  int rollout_steps = 100;  // 2 s at 50 Hz
};

struct PathsConfig {
  std::string dataset = "dataset.csv";
  std::string model = "model.json";
  std::string report = "report.json";
  std::string plots = "plots";  // prefix for plot-data files
};

// Everything a run needs, resolved from defaults, then the config file,
// then command-line flags (flags win). All randomness grows from the one
// run seed via per-module streams.
struct RunConfig {
  std::uint64_t seed = 1;
  double sample_rate = 50.0;
  PhysicalParams physical;
  RigConfig rig;
  GenerateConfig generate;
  NetworkConfig network;
  TrainConfig training;
  EvalConfig evaluation;
  PathsConfig paths;
};

void validate(const RunConfig& cfg);

// key = value pairs under [section] headers; '#' comments; values are
// numbers, booleans, quoted strings, or [comma, separated, numbers].
// Unknown keys are rejected.
RunConfig parse_config(const std::string& text, const RunConfig& base);
RunConfig load_config(const std::filesystem::path& path, const RunConfig& base);

// Resolved config in file syntax / as a JSON object string (for reports).
std::string dump_config(const RunConfig& cfg);
std::string config_json(const RunConfig& cfg);

}  // namespace pinode
