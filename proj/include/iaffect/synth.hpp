#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iaffect/core.hpp"
#include "iaffect/ingest.hpp"

namespace iaffect::synth {

/// Bursts start at `rate_per_min` per minute of unoccluded time and last
/// `mean_burst_s` on average (both exponential). Burst edges snap to bin
/// boundaries.
struct OcclusionConfig {
  double rate_per_min = 0.0;
  double mean_burst_s = 10.0;
};

/// State separation per feature group, in units of the matching noise std.
/// Body speed is expressed as the relative increase of landmark jitter when
/// fussy.
struct EffectSizes {
  double face_distances = 1.0;
  double face_aus = 1.0;
  double body_distances = 1.0;
  double body_speeds = 0.5;
};

struct SynthConfig {
  int n_infants = 26;
  double session_s = 600.0;
  double dwell_alert_s = 107.4;
  double dwell_fussy_s = 20.0;
  /// Gamma shape of the dwell times; 1 is exponential, < 1 heavier tailed.
  double dwell_shape = 1.0;
  double transition_ramp_s = 2.0;
  /// Fraction of fussy episodes annotated "crying" instead of "fussy".
  double crying_fraction = 0.3;
  EffectSizes effects;
  OcclusionConfig face_occlusion;
  OcclusionConfig body_occlusion;
  double body_fps = 29.97;
  double face_fps_min = 20.0;
  double face_fps_max = 30.0;
  double face_noise_px = 1.5;
  double body_noise_px = 2.0;
  double au_noise = 0.3;
  std::uint64_t seed = 0;
};

/// Throws ConfigError.
void validate(const SynthConfig& config);

/// Expected Alert share of the dwell process, dwell_alert / (sum).
double stationary_alert_fraction(const SynthConfig& config);

struct Transition {
  double time_s = 0.0;  // on the bin grid
  AffectLabel from = AffectLabel::Alert;
  AffectLabel to = AffectLabel::Fussy;
};

struct GroundTruth {
  std::string infant_id;
  std::string session_id;
  std::vector<AffectLabel> bin_states;
  std::vector<Transition> transitions;
  /// Sampled transitions that snapped onto a neighbour (episodes shorter
  /// than half a bin) and were removed.
  std::size_t collapsed = 0;
  std::vector<std::uint8_t> face_occluded;  // per bin
  std::vector<std::uint8_t> body_occluded;
};

struct GeneratedSession {
  std::string frames_text;  // ingest frames schema
  std::string labels_text;  // ingest labels schema
  GroundTruth truth;
};

/// Seed of infant i: derive_seed(config.seed, i).
std::uint64_t infant_seed(const SynthConfig& config, std::size_t infant_index);
std::string infant_name(std::size_t infant_index);

/// Fully determined by (config, infant_index).
GeneratedSession generate_session(const SynthConfig& config, std::size_t infant_index);

struct GeneratedDataset {
  std::filesystem::path manifest_path;
  ingest::DatasetManifest manifest;
  std::vector<GroundTruth> truth;
};

/// Writes `<infant>.frames.csv`, `<infant>.labels.csv` per infant plus
/// `manifest.json` under `out_dir`. Throws TooFewInfants below 5 infants and
/// DiskError on write failures.
GeneratedDataset generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir,
                                  int jobs = 1);

}  // namespace iaffect::synth
