#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iaffect/core.hpp"

namespace iaffect::ingest {

struct ManifestEntry {
  std::string infant_id;
  std::string session_id;
  std::filesystem::path frames_path;
  std::filesystem::path labels_path;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

/// Label change point: `raw_label` holds from `time_s` until the next row.
struct LabelRow {
  double time_s = 0.0;
  std::string raw_label;
};

/// Frames file: one comma-separated record per line,
///   session_id,time_s,face|body,confidence,x1,y1,...,xN,yN[,au1..au17]
/// Blank lines and lines starting with '#' are skipped.
std::vector<FrameRecord> parse_frames(const std::filesystem::path& path);
std::vector<FrameRecord> parse_frames_text(std::string_view text);

/// Labels file: `time_s,raw_label` per line, non-decreasing in time.
std::vector<LabelRow> parse_labels(const std::filesystem::path& path);
std::vector<LabelRow> parse_labels_text(std::string_view text);

/// Manifest: JSON object `{"entries": [{"infant_id", "session_id",
/// "frames", "labels"}, ...]}`. Relative paths resolve against the
/// manifest's directory.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Forward-fills change-point labels onto frames (frames before the first
/// row get an empty code, which maps to Excluded).
void attach_labels(std::vector<FrameRecord>& frames, const std::vector<LabelRow>& labels);

Session load_session(const ManifestEntry& entry, const BinningOptions& options = {});

struct ExcludedSession {
  ManifestEntry entry;
  std::string reason;
};

struct Dataset {
  std::vector<Session> sessions;
  std::vector<ExcludedSession> excluded;
};

/// Loads every manifest entry; sessions whose files are missing are
/// recorded in `excluded` and left out.
Dataset load_dataset(const DatasetManifest& manifest, const BinningOptions& options = {});

/// Number formatting for frame rows. `decimals` fixes the digits after the
/// point; without it the shortest round-trip representation is written.
std::string format_frame_line(const FrameRecord& frame, std::optional<int> decimals = std::nullopt);

/// Writes a session back out as one frame per populated modality slot per
/// bin (at t = k * bin_width) plus label change points. Re-loading the
/// files reproduces the session's bin content exactly.
void write_session(const Session& session, const std::filesystem::path& frames_path,
                   const std::filesystem::path& labels_path, double bin_width = kBinWidth);

}  // namespace iaffect::ingest
