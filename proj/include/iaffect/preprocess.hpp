#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "iaffect/core.hpp"

namespace iaffect {

enum class FeatureGroupId : std::uint8_t { FaceDistances, FaceAus, BodyDistances, BodySpeeds };

inline constexpr std::array<FeatureGroupId, 4> kAllGroups = {
    FeatureGroupId::FaceDistances, FeatureGroupId::FaceAus, FeatureGroupId::BodyDistances,
    FeatureGroupId::BodySpeeds};

std::string_view to_string(FeatureGroupId group);
std::optional<FeatureGroupId> parse_group(std::string_view text);
inline std::size_t group_index(FeatureGroupId g) { return static_cast<std::size_t>(g); }
inline Modality modality_of(FeatureGroupId g) {
  return g == FeatureGroupId::FaceDistances || g == FeatureGroupId::FaceAus ? Modality::Face
                                                                             : Modality::Body;
}

}  // namespace iaffect

namespace iaffect::preprocess {

/// Anatomical indices into the 68-point face and 25-point body conventions.
struct LandmarkConfig {
  std::size_t face_anchor = 30;  // nose tip
  std::size_t face_chin = 8;
  std::array<std::size_t, 2> face_brow = {19, 24};  // mid-brow stands in for top of head
  std::size_t body_anchor = 1;   // neck
  std::size_t body_pelvis = 8;   // mid-hip
  std::vector<std::size_t> body_retained = {0, 1, 2, 3, 4, 5, 6, 7, 8, 15, 16, 17, 18};
  double degenerate_eps = 1e-6;
};

/// Base (per-bin) length of each group under `config`.
std::size_t base_length(FeatureGroupId group, const LandmarkConfig& config = {});

struct BinFeatures {
  std::int64_t bin_index = 0;
  std::array<std::vector<double>, 4> groups;  // indexed by group_index()
  bool face_valid = false;
  bool body_valid = false;
  AffectLabel label = AffectLabel::Excluded;

  const std::vector<double>& operator[](FeatureGroupId g) const { return groups[group_index(g)]; }
};

std::vector<Point2> center_landmarks(std::span<const Point2> points, std::size_t anchor_index);

/// Throws DegenerateScale when scale_length <= eps.
std::vector<Point2> scale_landmarks(std::span<const Point2> points, double scale_length,
                                    double eps = 1e-6);

/// Euclidean distances over pairs (i, j), i < j, in lexicographic order.
std::vector<double> pairwise_distances(std::span<const Point2> points);
void pairwise_distances_into(std::span<const Point2> points, std::span<double> out);

/// Per-landmark displacement since `prev`; all zeros when `prev` is absent.
std::vector<double> landmark_speeds(std::optional<std::span<const Point2>> prev,
                                    std::span<const Point2> curr);

/// Centred and scaled face landmarks, or nullopt when the face length is
/// degenerate.
std::optional<std::vector<Point2>> normalize_face(std::span<const Point2> points,
                                                  const LandmarkConfig& config = {});
/// Retained (upper-body) landmarks centred on the neck and scaled by the
/// torso length, or nullopt when the torso length is degenerate.
std::optional<std::vector<Point2>> normalize_body(std::span<const Point2> points,
                                                  const LandmarkConfig& config = {});

std::vector<BinFeatures> compute_bin_features(const Session& session,
                                              const LandmarkConfig& config = {});

/// Column-major view of one session's base features: `column(g, f)` is the
/// series of base feature f of group g across all bins. Same values as
/// compute_bin_features, laid out for windowed aggregation.
class FeatureColumns {
 public:
  FeatureColumns() = default;
  FeatureColumns(const Session& session, const LandmarkConfig& config = {});

  std::size_t bins() const { return bins_; }
  std::size_t width(FeatureGroupId g) const { return widths_[group_index(g)]; }
  std::span<const double> column(FeatureGroupId g, std::size_t feature) const {
    return {data_[group_index(g)].data() + feature * bins_, bins_};
  }

 private:
  std::size_t bins_ = 0;
  std::array<std::size_t, 4> widths_{};
  std::array<std::vector<double>, 4> data_;
};

}  // namespace iaffect::preprocess
