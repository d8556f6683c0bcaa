#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "lcl/grad_check.hpp"
#include "lcl/trainer.hpp"

namespace lcl {

extern const char* const kToolVersion;

// Lowercase tokens used in config files, CSV columns, and directory names.
std::string to_token(LossKind kind);
std::string to_token(PlantKind kind);
std::string to_token(TaskSpace space);
std::string to_token(Activation activation);
LossKind loss_from_token(const std::string& token);
PlantKind plant_from_token(const std::string& token);
TaskSpace space_from_token(const std::string& token);
Activation activation_from_token(const std::string& token);

// Strict config parsing: every key is optional and defaulted, unknown keys
// raise ConfigError naming the full key path, values are range-checked.
// config_to_json echoes the complete effective config, so a round trip
// through the two functions is the identity.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

// Stable id of a run: seeded FNV-1a over the canonical serialization of the
// effective config. Identical configs (seed included) share an id.
std::string run_id(const ExperimentConfig& config);

struct RunManifest {
  std::string id;
  std::string tool_version;
  std::string started_at;  // wall-clock; excluded from determinism checks
  nlohmann::json config;
};

void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest(const std::string& path);

// One row per report. force_track_mse stays empty for plants without a
// contact channel; floats carry 17 significant digits so a read-back parses
// to bit-identical values.
extern const char* const kMetricsCsvHeader;
void write_metrics_csv(const std::vector<IterationReport>& reports,
                       const ExperimentConfig& config, const std::string& id,
                       const std::string& path);
std::vector<IterationReport> read_metrics_csv(const std::string& path);

// Transition dump, one row per transition:
//   iteration,loss_kind,source,synthetic_desired,t_index,
//   s0..,tau0..,snext0..,sdes0..
// Dimensions are recovered from the header on read.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

// Self-contained snapshot of one iteration: effective config, layer shapes,
// normalization statistics, segment layout, and the flat parameter vector.
// read_checkpoint rebuilds working model handles without replaying training.
struct Checkpoint {
  int format_version = 1;
  int iteration = 0;
  ExperimentConfig config;
  ParamStore store;
  EnsembleForwardModel f;
  ControllerModel g;
  Normalizer norm;
};

void write_checkpoint(const ParamStore& store, const EnsembleForwardModel& f,
                      const ControllerModel& g, const Normalizer& norm,
                      const ExperimentConfig& config, int iteration, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

// Gradient check over every loss configuration the experiments run: each
// plant's observation layout with the default networks, the per-member
// forward objective plus all four controller objectives, on a short babble
// batch. Shared by the command-line harness and the acceptance gate.
struct GradCheckCase {
  std::string name;
  GradCheckReport report;
};

std::vector<GradCheckCase> gradcheck_experiment_losses(double step = 1e-5, double tol = 1e-4);

}  // namespace lcl
