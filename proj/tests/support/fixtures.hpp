#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "iaffect/core.hpp"

namespace fixture {

inline iaffect::FrameRecord face_frame(double t, double conf, double base = 1.0,
                                       const std::string& session = "s1") {
  iaffect::FrameRecord f;
  f.session_id = session;
  f.time_s = t;
  f.modality = iaffect::Modality::Face;
  f.confidence = conf;
  for (std::size_t i = 0; i < iaffect::kFacePoints; ++i) {
    f.points.push_back({base + static_cast<double>(i), base * 2.0 + static_cast<double>(i % 7)});
  }
  f.aus.assign(iaffect::kActionUnits, base);
  return f;
}

inline iaffect::FrameRecord body_frame(double t, double conf, double base = 1.0,
                                       const std::string& session = "s1") {
  iaffect::FrameRecord f;
  f.session_id = session;
  f.time_s = t;
  f.modality = iaffect::Modality::Body;
  f.confidence = conf;
  for (std::size_t i = 0; i < iaffect::kBodyPoints; ++i) {
    f.points.push_back({base + 3.0 * static_cast<double>(i), base - static_cast<double>(i)});
  }
  return f;
}

/// A plausible face (nose tip at index 30, chin 8 below, brows 19/24 above)
/// in integer coordinates so that translations stay exact.
inline std::array<iaffect::Point2, iaffect::kFacePoints> face_shape(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> jitter(-20, 20);
  std::array<iaffect::Point2, iaffect::kFacePoints> p{};
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = {100.0 + jitter(rng), 100.0 + jitter(rng)};
  }
  p[30] = {100, 100};
  p[8] = {100, 160};
  p[19] = {80, 50};
  p[24] = {120, 50};
  return p;
}

inline std::array<iaffect::Point2, iaffect::kBodyPoints> body_shape(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> jitter(-30, 30);
  std::array<iaffect::Point2, iaffect::kBodyPoints> p{};
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = {200.0 + jitter(rng), 200.0 + jitter(rng)};
  }
  p[1] = {200, 150};
  p[8] = {200, 250};
  return p;
}

/// Session of `n` bins with random but valid landmarks; labels alternate in
/// runs of `run` bins starting with Alert.
inline iaffect::Session random_session(std::size_t n, std::uint64_t seed, std::size_t run = 40,
                                       const std::string& id = "s1",
                                       const std::string& infant = "i1") {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> au(0.0, 3.0);
  iaffect::Session s;
  s.session_id = id;
  s.infant_id = infant;
  s.bins.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& b = s.bins[k];
    b.bin_index = static_cast<std::int64_t>(k);
    const auto face = face_shape(rng);
    std::copy(face.begin(), face.end(), b.face_points.begin());
    const auto body = body_shape(rng);
    std::copy(body.begin(), body.end(), b.body_points.begin());
    for (auto& a : b.face_aus) a = au(rng);
    b.face_conf = 0.9;
    b.body_conf = 0.9;
    b.face_valid = true;
    b.body_valid = true;
    b.face_frames = 1;
    b.body_frames = 1;
    b.label = (k / run) % 2 == 0 ? iaffect::AffectLabel::Alert : iaffect::AffectLabel::Fussy;
  }
  return s;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("iaffect_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
