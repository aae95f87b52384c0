#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iaffect/core.hpp"
#include "iaffect/eval.hpp"
#include "iaffect/model.hpp"
#include "iaffect/synth.hpp"
#include "iaffect/windows.hpp"

namespace iaffect::cli {

struct SweepConfig {
  std::vector<double> long_face_s = {1, 2, 4, 8, 16, 32, 64};
  std::vector<double> long_body_s = {1, 2, 4, 8, 16, 32, 64};
  std::vector<model::ModelKind> models = {model::ModelKind::Joint};
};

struct PredictConfig {
  /// One file, or face then body files for late fusion. Defaults to the
  /// files `train` writes under the output directory.
  std::vector<std::filesystem::path> model_paths;
  /// Session to score; the first manifest entry when empty.
  std::string session_id;
};

/// Everything a command needs. Loaded from one JSON file; relative paths
/// resolve against that file's directory. Unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  int jobs = 1;
  model::ModelKind model = model::ModelKind::Joint;
  std::filesystem::path manifest;
  int folds = 5;
  BinningOptions binning;
  windows::WindowConfig window;
  model::TrainConfig train;
  synth::SynthConfig synth;
  SweepConfig sweep;
  PredictConfig predict;
};

/// Throws ConfigError with the offending key path.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<int> jobs;
};
void apply(RunConfig& config, const Overrides& overrides);

/// Commands write their outputs under config.out_dir and progress lines to
/// `log`. They throw on failure; run_command maps that to an exit code.
void cmd_synth(const RunConfig& config, std::ostream& log);
void cmd_ingest_check(const RunConfig& config, std::ostream& log);
void cmd_sweep(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_predict(const RunConfig& config, std::ostream& log);

inline constexpr std::string_view kCommands[] = {"synth",    "ingest-check", "sweep",
                                                 "evaluate", "train",        "predict"};

/// 0 on success; 1 with one "error: ..." line on `err` otherwise.
int run_command(std::string_view command, const RunConfig& config, std::ostream& log,
                std::ostream& err);

/// Model files `train` writes for a model kind (two for late fusion).
std::vector<std::filesystem::path> model_files(const RunConfig& config, model::ModelKind kind);

/// Fits the requested networks on every session's confident samples, with
/// one shared feature selection.
std::vector<model::GroupedModel> train_full(std::span<const Session> sessions,
                                            model::ModelKind kind, const RunConfig& config);

/// Scores every sample of one session; late fusion takes face then body.
eval::PredictionTrace predict_session(const Session& session,
                                      std::span<const model::GroupedModel> models,
                                      const RunConfig& config);

}  // namespace iaffect::cli
