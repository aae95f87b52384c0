#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iaffect/core.hpp"
#include "iaffect/model.hpp"
#include "iaffect/preprocess.hpp"
#include "iaffect/select.hpp"
#include "iaffect/windows.hpp"

namespace iaffect::eval {

struct InfantPrevalence {
  std::string infant_id;
  double fussy_fraction = 0.0;
};

struct FoldAssignment {
  int k = 5;
  std::map<std::string, int> fold_of;

  int fold(const std::string& infant_id) const;
  std::vector<std::vector<std::string>> members() const;
};

/// Sorts infants by descending fussy fraction (a seeded shuffle first, so
/// exact ties land in random order) and deals them snake-wise over the
/// folds: 0..k-1, k-1..0, ... Throws TooFewInfants when fewer than k.
FoldAssignment stratified_subject_folds(std::span<const InfantPrevalence> infants, int k = 5,
                                        std::uint64_t seed = 0);

/// Mann-Whitney AUC with mid-ranks for ties; `positive[i]` marks the Fussy
/// class. Throws SingleClass.
double auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

inline constexpr double kDecisionThreshold = 0.5;
inline AffectLabel threshold_label(double prob) {
  return prob >= kDecisionThreshold ? AffectLabel::Fussy : AffectLabel::Alert;
}

struct TraceEntry {
  std::string infant_id;
  std::string session_id;
  std::int64_t end_bin = 0;
  AffectLabel truth = AffectLabel::Alert;
  double prob = 0.5;
  AffectLabel predicted = AffectLabel::Alert;
  bool confident = false;
  int fold = -1;
};

using PredictionTrace = std::vector<TraceEntry>;

/// AUC over the entries (optionally confident ones only); NaN when the
/// subset holds a single class.
double trace_auc(const PredictionTrace& trace, bool confident_only);
double trace_accuracy(const PredictionTrace& trace, bool confident_only);

enum class CurveKind : std::uint8_t { Tsat, Tspt };
std::string_view to_string(CurveKind kind);

struct CurveBin {
  std::int64_t bin = 0;
  double bin_start_s = 0.0;
  double mean_accuracy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_infants = 0;
};

struct TemporalCurve {
  CurveKind kind = CurveKind::Tsat;
  AffectLabel state = AffectLabel::Alert;
  std::vector<CurveBin> bins;
};

/// Per-bin true labels of every session that appears in a trace.
using SessionLabels = std::map<std::string, std::vector<AffectLabel>>;
SessionLabels session_labels(std::span<const Session> sessions);

/// Curve bin for an elapsed time, floor(elapsed / 0.25).
std::int64_t elapsed_bin(double elapsed_s);

/// Bins elapsed since the most recent true-label change at or before each
/// entry's end bin (session start counts as a change at bin 0).
std::vector<std::int64_t> tsat_bins(const PredictionTrace& trace, const SessionLabels& labels);
/// Bins elapsed since the thresholded prediction last changed within the
/// session; a session start or a gap in end bins restarts the count.
std::vector<std::int64_t> tspt_bins(const PredictionTrace& trace);

/// Alert and Fussy curves. TSAT groups by the true state, TSPT by the
/// predicted state. Per-infant accuracies are averaged per bin; bins with
/// three or fewer samples are dropped.
std::array<TemporalCurve, 2> tsat_curve(const PredictionTrace& trace, const SessionLabels& labels);
std::array<TemporalCurve, 2> tspt_curve(const PredictionTrace& trace);

/// mean +- 1.96 s / sqrt(n), clamped to [0, 1]; a single value gives a
/// point interval.
std::pair<double, double> confidence_interval_95(std::span<const double> values);

/// One session's sample index plus per-class moments of every aggregate
/// feature over its confident samples. Enough to fit a selection without
/// materialising the aggregates.
struct PreparedSession {
  std::size_t session = 0;  // position in the input span
  windows::SampleIndex index;
  std::array<select::ClassMoments, 4> moments;
};

PreparedSession prepare_session(const Session& session, const windows::WindowConfig& window,
                                const preprocess::LandmarkConfig& landmarks = {});

/// Selected aggregate values of every sample, row-major, columns ordered by
/// group (kAllGroups order) then by the selection's chosen order. Identical
/// to picking the same entries out of build_samples.
std::vector<double> extract_selected(const preprocess::FeatureColumns& columns,
                                     const windows::SampleIndex& index,
                                     const select::FeatureSelection& selection,
                                     const windows::WindowConfig& window);

struct CvOptions {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<model::ModelKind> models = {model::ModelKind::Joint};
  windows::WindowConfig window;
  model::TrainConfig train;
  preprocess::LandmarkConfig landmarks;
  int jobs = 1;
};

struct FoldMetric {
  model::ModelKind model = model::ModelKind::Joint;
  int fold = 0;
  bool confident = false;  // dataset: D_confident or D_total
  double auc = 0.0;        // NaN when the test subset is single-class
  double accuracy = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_fussy = 0;
};

struct ModelResult {
  model::ModelKind model = model::ModelKind::Joint;
  std::vector<double> auc_confident;  // per fold
  std::vector<double> auc_total;
  PredictionTrace trace;

  double mean_auc_confident() const;
  double mean_auc_total() const;
};

struct SkippedSession {
  std::string session_id;
  std::string reason;
};

struct CvResult {
  FoldAssignment folds;
  std::vector<ModelResult> models;
  std::vector<FoldMetric> metrics;
  std::vector<SkippedSession> skipped;

  const ModelResult& result(model::ModelKind kind) const;
};

/// Subject-wise k-fold cross-validation. Each fold fits one feature
/// selection on the training folds' confident samples, shared by every
/// requested model, trains on those samples and predicts every test-fold
/// sample. Late fusion averages the fold's face and body models. Sessions
/// too short for the longest window are skipped and listed. Throws
/// TooFewInfants; a SingleClassFold aborts the run naming the fold.
CvResult run_cv(std::span<const Session> sessions, const CvOptions& options);

/// Mean over the non-NaN entries; NaN if there are none.
double nan_mean(std::span<const double> values);

void write_metrics_csv(const std::filesystem::path& path, std::span<const FoldMetric> metrics);
void write_trace_csv(const std::filesystem::path& path,
                     std::span<const std::pair<model::ModelKind, const PredictionTrace*>> traces);
void write_curves_csv(
    const std::filesystem::path& path,
    std::span<const std::pair<model::ModelKind, std::array<TemporalCurve, 2>>> curves);

}  // namespace iaffect::eval
