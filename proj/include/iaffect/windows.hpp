#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iaffect/core.hpp"
#include "iaffect/preprocess.hpp"

namespace iaffect::windows {

struct WindowConfig {
  double short_s = 0.5;
  double long_face_s = 32.0;
  double long_body_s = 2.0;
  double success_fraction = 0.9;
  double max_long_s = 64.0;
  bool population_std = true;
};

/// Throws InvalidWindowConfig unless every length is a whole number of bins,
/// short_s >= 0.5, short_s <= long <= max_long_s.
void validate(const WindowConfig& config);
std::size_t seconds_to_bins(double seconds);

/// Position of each statistic inside the six aggregates of one base feature.
enum class AggregateKind : std::uint8_t { ShortMax, ShortMean, ShortStd, LongMax, LongMean, LongStd };
inline constexpr std::size_t kAggregatesPerFeature = 6;
inline constexpr std::size_t aggregate_index(std::size_t base_feature, AggregateKind kind) {
  return base_feature * kAggregatesPerFeature + static_cast<std::size_t>(kind);
}

struct Aggregate {
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

/// Two-pass max/mean/std of one scalar series. Throws EmptyWindow.
Aggregate aggregate_scalar(std::span<const double> series, bool population_std = true);

/// Elementwise aggregate over a window of equal-length feature vectors.
std::vector<Aggregate> aggregate_window(std::span<const std::vector<double>> series,
                                        bool population_std = true);

/// Sliding max/mean/std of `series` over windows of `window` bins ending at
/// each of `end_bins` (ascending, each >= window - 1). Uses monotone queues
/// for the extrema and prefix sums for the moments; windows whose min equals
/// their max report that value with std exactly 0.
class RollingAggregator {
 public:
  void run(std::span<const double> series, std::size_t window,
           std::span<const std::int64_t> end_bins, bool population_std, std::span<double> max_out,
           std::span<double> mean_out, std::span<double> std_out);

 private:
  std::vector<long double> prefix_;
  std::vector<long double> prefix_sq_;
  std::vector<std::size_t> max_q_;
  std::vector<std::size_t> min_q_;
};

/// Fraction of valid bins in [end_bin - window + 1, end_bin] is at least
/// `success_fraction`. Throws WindowOutOfRange.
bool window_success(std::span<const std::uint8_t> valid, std::int64_t end_bin,
                    std::size_t window_bins, double success_fraction = 0.9);
bool window_success(const Session& session, std::int64_t end_bin, double long_s,
                    Modality modality, double success_fraction = 0.9);

/// Per-bin validity after preprocessing: confidence above threshold and a
/// non-degenerate normalisation scale.
struct BinValidity {
  std::vector<std::uint8_t> face;
  std::vector<std::uint8_t> body;
};
BinValidity bin_validity(const Session& session, const preprocess::LandmarkConfig& config = {});

struct WindowedSample {
  std::string infant_id;
  std::string session_id;
  std::int64_t end_bin = 0;
  AffectLabel label = AffectLabel::Excluded;
  std::array<std::vector<double>, 4> groups;  // 6 aggregates per base feature
  bool face_confident = false;
  bool body_confident = false;

  const std::vector<double>& operator[](FeatureGroupId g) const { return groups[group_index(g)]; }
};

/// Sample bookkeeping without features: one entry per non-Excluded end bin
/// where the longest window fits.
struct SampleIndex {
  std::string infant_id;
  std::string session_id;
  std::vector<std::int64_t> end_bins;
  std::vector<AffectLabel> labels;
  std::vector<std::uint8_t> face_confident;
  std::vector<std::uint8_t> body_confident;

  std::size_t size() const { return end_bins.size(); }
  bool confident(std::size_t i) const { return face_confident[i] && body_confident[i]; }
};

/// Throws SessionTooShort when the longest window never fits.
SampleIndex index_samples(const Session& session, const BinValidity& validity,
                          const WindowConfig& config);

/// Long window used for a group's aggregates.
double long_window_for(FeatureGroupId group, const WindowConfig& config);

/// Materialises every aggregate of every group. Memory grows with
/// samples x 6 x base features, so this suits short sessions and tests;
/// the streaming path in features.hpp computes the same values.
std::vector<WindowedSample> build_samples(const Session& session, const WindowConfig& config,
                                          const preprocess::LandmarkConfig& landmarks = {});

struct Partition {
  std::vector<std::size_t> confident;  // indices into the sample list
  std::vector<std::size_t> total;
};
Partition partition(std::span<const WindowedSample> samples);

}  // namespace iaffect::windows
