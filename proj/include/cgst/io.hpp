#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cgst/estimation.hpp"
#include "cgst/simulator.hpp"

namespace cgst {

// Fitted model: one of the four parametrised variants or the 67-parameter general model.
struct ModelChoice {
  bool general = false;
  ModelVariant variant = ModelVariant::Markovian;
};
std::string to_string(const ModelChoice& m);
ModelChoice model_from_string(const std::string& s);  // markov|nonmarkov|markov-amp|nonmarkov-amp|general

enum class DataSource { Analytic, MonteCarlo };
std::string to_string(DataSource d);
DataSource data_from_string(const std::string& s);  // analytic|mc

// Data-generating gate set: the full analytic channel of the configured noise (non-Markovian, with
// amplitude terms if configured), or its filtered integrals restricted to the fitted variant.
enum class TruthModel { Full, Fitted };
std::string to_string(TruthModel t);
TruthModel truth_from_string(const std::string& s);  // full|fitted

// Sweep grids; unused lists are ignored by the other subcommands.
struct SweepConfig {
  std::vector<long> shots = {100, 1000, 10000};
  std::vector<int> p_max = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
  std::vector<double> tau_c = {1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5, 1e-4};
  std::vector<int> circuits;  // circuit counts; empty = 1 .. design size + 5
};

struct RunConfig {
  NoiseConfig noise;
  PulseSet pulses;
  QuadConfig quad;
  int p_max = 16;
  long shots = 1000;  // per circuit and depth
  ModelChoice model;
  DataSource data = DataSource::Analytic;
  TruthModel truth = TruthModel::Full;  // Fitted needs analytic data and a parametrised model
  bool distance_includes_spam = false;   // "distance": "gates" | "all"
  McMode mc_mode = McMode::TwoStage;
  FitConfig fit;  // variant, general and depth_schedule are filled from the fields above
  int repeats = 20;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  SweepConfig sweep;

  // Throws InvalidConfig (or the sub-config's error) on any inconsistent field.
  void validate() const;
  // FitConfig with the model and the depth schedule up to p_max. A cost_switch_depth beyond that
  // schedule falls back to the default (second-to-last stage).
  FitConfig fit_config(int p_max_override = 0) const;
};

// Every field is optional; missing fields keep their defaults. Unknown keys are a Parse error so
// misspelt knobs do not silently fall back.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
RunConfig read_run_config(const std::string& path);

// 64-bit FNV-1a of the compact JSON dump of `c`, as 16 hex digits.
std::string config_hash(const RunConfig& c);

// Leaves out wall time so repeated runs write identical files.
nlohmann::json to_json(const FitResult& r, const std::vector<std::string>& names);
nlohmann::json to_json(const GateSetPTMs& g);

// Creates parent directories. Throws InvalidConfig when the file cannot be written.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cgst
