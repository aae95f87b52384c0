#include "iaffect/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "iaffect/error.hpp"

namespace iaffect {

std::string_view to_string(AffectLabel label) {
  switch (label) {
    case AffectLabel::Alert:
      return "alert";
    case AffectLabel::Fussy:
      return "fussy";
    case AffectLabel::Excluded:
      return "excluded";
  }
  return "excluded";
}

std::string_view to_string(Modality modality) {
  return modality == Modality::Face ? "face" : "body";
}

std::optional<Modality> parse_modality(std::string_view text) {
  if (text == "face") return Modality::Face;
  if (text == "body") return Modality::Body;
  return std::nullopt;
}

AffectLabel map_label(std::string_view raw_label) {
  if (raw_label == "alert") return AffectLabel::Alert;
  if (raw_label == "fussy" || raw_label == "crying") return AffectLabel::Fussy;
  return AffectLabel::Excluded;
}

std::string_view canonical_code(AffectLabel label) { return to_string(label); }

std::int64_t bin_index_for(double time_s, double bin_width) {
  return static_cast<std::int64_t>(std::floor(time_s / bin_width));
}

bool same_content(const Bin& a, const Bin& b) {
  return a.bin_index == b.bin_index && a.face_points == b.face_points &&
         a.face_aus == b.face_aus && a.face_conf == b.face_conf &&
         a.body_points == b.body_points && a.body_conf == b.body_conf &&
         a.label == b.label && a.face_valid == b.face_valid && a.body_valid == b.body_valid;
}

bool same_content(const Session& a, const Session& b) {
  if (a.session_id != b.session_id || a.infant_id != b.infant_id ||
      a.bins.size() != b.bins.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    if (!same_content(a.bins[i], b.bins[i])) return false;
  }
  return true;
}

namespace {

struct BinAccumulator {
  std::array<Point2, kFacePoints> face_sum{};
  std::array<double, kActionUnits> au_sum{};
  double face_conf_sum = 0.0;
  std::array<Point2, kBodyPoints> body_sum{};
  double body_conf_sum = 0.0;
  std::uint32_t face_n = 0;
  std::uint32_t body_n = 0;
  std::array<std::uint32_t, 3> votes{};
};

AffectLabel majority(const std::array<std::uint32_t, 3>& votes) {
  const auto alert = votes[static_cast<int>(AffectLabel::Alert)];
  const auto fussy = votes[static_cast<int>(AffectLabel::Fussy)];
  const auto excluded = votes[static_cast<int>(AffectLabel::Excluded)];
  if (fussy == 0 && alert == 0) return AffectLabel::Excluded;
  if (fussy >= alert && fussy >= excluded) return AffectLabel::Fussy;
  if (alert >= excluded) return AffectLabel::Alert;
  return AffectLabel::Excluded;
}

}  // namespace

std::vector<Bin> bin_frames(std::span<const FrameRecord> frames, const BinningOptions& options) {
  if (frames.empty()) return {};
  const std::string& session_id = frames.front().session_id;
  double last_face = -std::numeric_limits<double>::infinity();
  double last_body = -std::numeric_limits<double>::infinity();
  std::int64_t max_index = 0;
  for (const auto& f : frames) {
    if (f.session_id != session_id) {
      throw MixedSession("frames from sessions '" + session_id + "' and '" + f.session_id +
                         "' in one stream");
    }
    double& last = f.modality == Modality::Face ? last_face : last_body;
    if (f.time_s < last) {
      throw NonMonotonicTime("timestamp " + std::to_string(f.time_s) + " after " +
                             std::to_string(last) + " in " + std::string(to_string(f.modality)) +
                             " stream");
    }
    if (f.time_s < 0.0) throw NonMonotonicTime("negative timestamp");
    if (f.points.size() != point_count(f.modality) ||
        f.aus.size() != (f.modality == Modality::Face ? kActionUnits : 0)) {
      throw LengthMismatch("frame at " + std::to_string(f.time_s) + " has wrong point/AU count");
    }
    last = f.time_s;
    max_index = std::max(max_index, bin_index_for(f.time_s, options.bin_width));
  }

  std::vector<BinAccumulator> acc(static_cast<std::size_t>(max_index + 1));
  for (const auto& f : frames) {
    auto& a = acc[static_cast<std::size_t>(bin_index_for(f.time_s, options.bin_width))];
    if (f.modality == Modality::Face) {
      for (std::size_t i = 0; i < kFacePoints; ++i) {
        a.face_sum[i].x += f.points[i].x;
        a.face_sum[i].y += f.points[i].y;
      }
      for (std::size_t i = 0; i < kActionUnits; ++i) a.au_sum[i] += f.aus[i];
      a.face_conf_sum += f.confidence;
      ++a.face_n;
    } else {
      for (std::size_t i = 0; i < kBodyPoints; ++i) {
        a.body_sum[i].x += f.points[i].x;
        a.body_sum[i].y += f.points[i].y;
      }
      a.body_conf_sum += f.confidence;
      ++a.body_n;
    }
    ++a.votes[static_cast<int>(map_label(f.raw_label))];
  }

  std::vector<Bin> bins(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) {
    const auto& a = acc[k];
    Bin& b = bins[k];
    b.bin_index = static_cast<std::int64_t>(k);
    b.face_frames = a.face_n;
    b.body_frames = a.body_n;
    if (a.face_n > 0) {
      const double n = a.face_n;
      for (std::size_t i = 0; i < kFacePoints; ++i) {
        b.face_points[i] = {a.face_sum[i].x / n, a.face_sum[i].y / n};
      }
      for (std::size_t i = 0; i < kActionUnits; ++i) b.face_aus[i] = a.au_sum[i] / n;
      b.face_conf = a.face_conf_sum / n;
    }
    if (a.body_n > 0) {
      const double n = a.body_n;
      for (std::size_t i = 0; i < kBodyPoints; ++i) {
        b.body_points[i] = {a.body_sum[i].x / n, a.body_sum[i].y / n};
      }
      b.body_conf = a.body_conf_sum / n;
    }
    b.face_valid = b.face_conf > options.confidence_threshold;
    b.body_valid = b.body_conf > options.confidence_threshold;
    b.label = majority(a.votes);
  }
  return bins;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    }
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace iaffect
