#include "iaffect/preprocess.hpp"

#include <cmath>

#include "iaffect/error.hpp"

namespace iaffect {

std::string_view to_string(FeatureGroupId group) {
  switch (group) {
    case FeatureGroupId::FaceDistances:
      return "face_distances";
    case FeatureGroupId::FaceAus:
      return "face_aus";
    case FeatureGroupId::BodyDistances:
      return "body_distances";
    case FeatureGroupId::BodySpeeds:
      return "body_speeds";
  }
  return "unknown";
}

std::optional<FeatureGroupId> parse_group(std::string_view text) {
  for (auto g : kAllGroups) {
    if (to_string(g) == text) return g;
  }
  return std::nullopt;
}

}  // namespace iaffect

namespace iaffect::preprocess {

namespace {

std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

double distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

std::size_t base_length(FeatureGroupId group, const LandmarkConfig& config) {
  switch (group) {
    case FeatureGroupId::FaceDistances:
      return pair_count(kFacePoints);
    case FeatureGroupId::FaceAus:
      return kActionUnits;
    case FeatureGroupId::BodyDistances:
      return pair_count(config.body_retained.size());
    case FeatureGroupId::BodySpeeds:
      return config.body_retained.size();
  }
  return 0;
}

std::vector<Point2> center_landmarks(std::span<const Point2> points, std::size_t anchor_index) {
  if (anchor_index >= points.size()) {
    throw AnchorOutOfRange("anchor " + std::to_string(anchor_index) + " outside " +
                           std::to_string(points.size()) + " points");
  }
  const Point2 anchor = points[anchor_index];
  std::vector<Point2> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = {points[i].x - anchor.x, points[i].y - anchor.y};
  }
  return out;
}

std::vector<Point2> scale_landmarks(std::span<const Point2> points, double scale_length,
                                    double eps) {
  if (!(scale_length > eps)) {
    throw DegenerateScale("scale length " + std::to_string(scale_length) + " <= " +
                          std::to_string(eps));
  }
  std::vector<Point2> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = {points[i].x / scale_length, points[i].y / scale_length};
  }
  return out;
}

void pairwise_distances_into(std::span<const Point2> points, std::span<double> out) {
  if (out.size() != pair_count(points.size())) throw LengthMismatch("pairwise output size");
  std::size_t k = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) out[k++] = distance(points[i], points[j]);
  }
}

std::vector<double> pairwise_distances(std::span<const Point2> points) {
  if (points.size() < 2) return {};
  std::vector<double> out(pair_count(points.size()));
  pairwise_distances_into(points, out);
  return out;
}

std::vector<double> landmark_speeds(std::optional<std::span<const Point2>> prev,
                                    std::span<const Point2> curr) {
  std::vector<double> out(curr.size(), 0.0);
  if (!prev) return out;
  if (prev->size() != curr.size()) {
    throw LengthMismatch("previous frame has " + std::to_string(prev->size()) +
                         " landmarks, current has " + std::to_string(curr.size()));
  }
  for (std::size_t i = 0; i < curr.size(); ++i) out[i] = distance((*prev)[i], curr[i]);
  return out;
}

std::optional<std::vector<Point2>> normalize_face(std::span<const Point2> points,
                                                  const LandmarkConfig& config) {
  const auto centered = center_landmarks(points, config.face_anchor);
  const Point2& b1 = centered.at(config.face_brow[0]);
  const Point2& b2 = centered.at(config.face_brow[1]);
  const Point2 brow{(b1.x + b2.x) / 2.0, (b1.y + b2.y) / 2.0};
  const double length = distance(centered.at(config.face_chin), brow);
  try {
    return scale_landmarks(centered, length, config.degenerate_eps);
  } catch (const DegenerateScale&) {
    return std::nullopt;
  }
}

std::optional<std::vector<Point2>> normalize_body(std::span<const Point2> points,
                                                  const LandmarkConfig& config) {
  const auto centered = center_landmarks(points, config.body_anchor);
  const double length =
      distance(centered.at(config.body_pelvis), centered.at(config.body_anchor));
  std::vector<Point2> retained;
  retained.reserve(config.body_retained.size());
  for (auto idx : config.body_retained) retained.push_back(centered.at(idx));
  try {
    return scale_landmarks(retained, length, config.degenerate_eps);
  } catch (const DegenerateScale&) {
    return std::nullopt;
  }
}

namespace {

/// Walks a session bin by bin, handing normalised features to a sink.
template <typename Sink>
void walk_features(const Session& session, const LandmarkConfig& config, Sink&& sink) {
  const std::size_t n_face = base_length(FeatureGroupId::FaceDistances, config);
  const std::size_t n_body = base_length(FeatureGroupId::BodyDistances, config);
  const std::size_t n_retained = config.body_retained.size();
  std::vector<double> face_dist(n_face);
  std::vector<double> body_dist(n_body);
  std::vector<double> speeds(n_retained);
  std::vector<Point2> prev_body;
  for (std::size_t k = 0; k < session.bins.size(); ++k) {
    const Bin& bin = session.bins[k];
    const auto face = normalize_face(bin.face_points, config);
    if (face) {
      pairwise_distances_into(*face, face_dist);
    } else {
      std::fill(face_dist.begin(), face_dist.end(), 0.0);
    }
    auto body = normalize_body(bin.body_points, config);
    const bool body_ok = body.has_value();
    if (body) {
      pairwise_distances_into(*body, body_dist);
    } else {
      std::fill(body_dist.begin(), body_dist.end(), 0.0);
      body = std::vector<Point2>(n_retained);
    }
    if (k == 0) {
      speeds = landmark_speeds(std::nullopt, *body);
    } else {
      speeds = landmark_speeds(std::span<const Point2>(prev_body), *body);
    }
    prev_body = std::move(*body);
    sink(k, face_dist, std::span<const double>(bin.face_aus), body_dist, speeds,
         bin.face_valid && face.has_value(), bin.body_valid && body_ok);
  }
}

}  // namespace

std::vector<BinFeatures> compute_bin_features(const Session& session,
                                              const LandmarkConfig& config) {
  std::vector<BinFeatures> out(session.bins.size());
  walk_features(session, config,
                [&](std::size_t k, std::span<const double> fd, std::span<const double> aus,
                    std::span<const double> bd, std::span<const double> sp, bool fv, bool bv) {
                  auto& bf = out[k];
                  bf.bin_index = session.bins[k].bin_index;
                  bf.groups[0].assign(fd.begin(), fd.end());
                  bf.groups[1].assign(aus.begin(), aus.end());
                  bf.groups[2].assign(bd.begin(), bd.end());
                  bf.groups[3].assign(sp.begin(), sp.end());
                  bf.face_valid = fv;
                  bf.body_valid = bv;
                  bf.label = session.bins[k].label;
                });
  return out;
}

FeatureColumns::FeatureColumns(const Session& session, const LandmarkConfig& config)
    : bins_(session.bins.size()) {
  for (auto g : kAllGroups) {
    widths_[group_index(g)] = base_length(g, config);
    data_[group_index(g)].assign(widths_[group_index(g)] * bins_, 0.0);
  }
  walk_features(session, config,
                [&](std::size_t k, std::span<const double> fd, std::span<const double> aus,
                    std::span<const double> bd, std::span<const double> sp, bool, bool) {
                  const std::array<std::span<const double>, 4> parts = {fd, aus, bd, sp};
                  for (std::size_t g = 0; g < 4; ++g) {
                    auto& col = data_[g];
                    for (std::size_t f = 0; f < parts[g].size(); ++f) col[f * bins_ + k] = parts[g][f];
                  }
                });
}

}  // namespace iaffect::preprocess
