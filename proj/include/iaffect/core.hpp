#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iaffect {

inline constexpr std::size_t kFacePoints = 68;
inline constexpr std::size_t kBodyPoints = 25;
inline constexpr std::size_t kActionUnits = 17;
inline constexpr double kBinWidth = 0.25;
inline constexpr double kDefaultConfidenceThreshold = 0.20;

enum class AffectLabel : std::uint8_t { Alert, Fussy, Excluded };
enum class Modality : std::uint8_t { Face, Body };

std::string_view to_string(AffectLabel label);
std::string_view to_string(Modality modality);
std::optional<Modality> parse_modality(std::string_view text);

/// Maps a manual annotation code onto the binary affect target. crying
/// merges into Fussy; drowsy, sleeping and anything unrecognised are
/// Excluded.
AffectLabel map_label(std::string_view raw_label);

/// Canonical annotation code written back out for a mapped label.
std::string_view canonical_code(AffectLabel label);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline std::size_t point_count(Modality modality) {
  return modality == Modality::Face ? kFacePoints : kBodyPoints;
}

struct FrameRecord {
  std::string session_id;
  double time_s = 0.0;
  Modality modality = Modality::Face;
  double confidence = 0.0;
  std::vector<Point2> points;
  std::vector<double> aus;  // kActionUnits values for Face, empty for Body
  std::string raw_label;
};

/// One fixed-width time slice. Bin k covers [k*w, (k+1)*w).
struct Bin {
  std::int64_t bin_index = 0;
  std::array<Point2, kFacePoints> face_points{};
  std::array<double, kActionUnits> face_aus{};
  double face_conf = 0.0;
  std::array<Point2, kBodyPoints> body_points{};
  double body_conf = 0.0;
  AffectLabel label = AffectLabel::Excluded;
  bool face_valid = false;
  bool body_valid = false;
  std::uint32_t face_frames = 0;
  std::uint32_t body_frames = 0;

  friend bool operator==(const Bin&, const Bin&) = default;
};

/// Compares everything a Bin carries except its frame counts.
bool same_content(const Bin& a, const Bin& b);

struct Session {
  std::string session_id;
  std::string infant_id;
  std::vector<Bin> bins;  // contiguous, bins[i].bin_index == i

  friend bool operator==(const Session&, const Session&) = default;
};

bool same_content(const Session& a, const Session& b);

struct BinningOptions {
  double bin_width = kBinWidth;
  double confidence_threshold = kDefaultConfidenceThreshold;
};

/// Averages a single-session frame stream into fixed-width bins starting at
/// bin 0. Per-modality means cover only that modality's frames; empty
/// modality slots stay zero with confidence 0. The bin label is the
/// majority mapped label over all frames in the bin with ties resolved
/// Fussy, then Alert, then Excluded.
std::vector<Bin> bin_frames(std::span<const FrameRecord> frames,
                            const BinningOptions& options = {});

/// Bin index for a timestamp (half-open intervals, boundaries go right).
std::int64_t bin_index_for(double time_s, double bin_width = kBinWidth);

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t splitmix64(std::uint64_t x);
/// Child seed for (master, a, b), e.g. (run seed, fold, model).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Runs fn(0..n-1) on up to `jobs` threads. Every index runs even if some
/// throw; the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace iaffect
