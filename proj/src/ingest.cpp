#include "iaffect/ingest.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "iaffect/error.hpp"
#include "iaffect/text.hpp"

namespace iaffect::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = text::trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    fn(line_no, line);
  }
}

FrameRecord parse_frame_line(std::size_t line_no, std::string_view line) {
  const auto fields = text::split(line, ',');
  if (fields.size() < 4) throw SchemaError(line_no, "expected at least 4 fields");
  FrameRecord f;
  f.session_id = std::string(text::trim(fields[0]));
  if (f.session_id.empty()) throw SchemaError(line_no, "empty session_id");
  if (!text::parse_double(fields[1], f.time_s) || f.time_s < 0.0) {
    throw SchemaError(line_no, "bad time_s");
  }
  const auto modality = parse_modality(text::trim(fields[2]));
  if (!modality) throw SchemaError(line_no, "modality must be face or body");
  f.modality = *modality;
  if (!text::parse_double(fields[3], f.confidence) || f.confidence < 0.0 || f.confidence > 1.0) {
    throw SchemaError(line_no, "confidence must be a number in [0,1]");
  }

  const std::size_t n_points = point_count(f.modality);
  const std::size_t n_aus = f.modality == Modality::Face ? kActionUnits : 0;
  const std::size_t numeric = fields.size() - 4;
  if (numeric != 2 * n_points + n_aus) {
    if (numeric >= n_aus && (numeric - n_aus) % 2 == 0) {
      throw PointCountError(line_no, std::string(to_string(f.modality)) + " row has " +
                                         std::to_string((numeric - n_aus) / 2) + " points, expected " +
                                         std::to_string(n_points));
    }
    throw SchemaError(line_no, "wrong field count " + std::to_string(fields.size()));
  }
  f.points.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    if (!text::parse_double(fields[4 + 2 * i], f.points[i].x) ||
        !text::parse_double(fields[5 + 2 * i], f.points[i].y)) {
      throw SchemaError(line_no, "bad coordinate for point " + std::to_string(i));
    }
  }
  f.aus.resize(n_aus);
  for (std::size_t i = 0; i < n_aus; ++i) {
    if (!text::parse_double(fields[4 + 2 * n_points + i], f.aus[i])) {
      throw SchemaError(line_no, "bad action unit " + std::to_string(i));
    }
  }
  return f;
}

}  // namespace

std::vector<FrameRecord> parse_frames_text(std::string_view text) {
  std::vector<FrameRecord> frames;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    frames.push_back(parse_frame_line(line_no, line));
  });
  return frames;
}

std::vector<FrameRecord> parse_frames(const fs::path& path) {
  return parse_frames_text(text::read_file(path));
}

std::vector<LabelRow> parse_labels_text(std::string_view text) {
  std::vector<LabelRow> rows;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = text::split(line, ',');
    if (fields.size() != 2) throw SchemaError(line_no, "label rows are time_s,raw_label");
    LabelRow row;
    if (!text::parse_double(fields[0], row.time_s) || row.time_s < 0.0) {
      throw SchemaError(line_no, "bad time_s");
    }
    if (!rows.empty() && row.time_s < rows.back().time_s) {
      throw NonMonotonicTime("label rows go back in time at line " + std::to_string(line_no));
    }
    row.raw_label = std::string(text::trim(fields[1]));
    rows.push_back(std::move(row));
  });
  return rows;
}

std::vector<LabelRow> parse_labels(const fs::path& path) {
  return parse_labels_text(text::read_file(path));
}

DatasetManifest read_manifest(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw SchemaError(0, "manifest " + path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw SchemaError(0, "manifest needs an 'entries' array");
  }
  const fs::path base = path.parent_path();
  DatasetManifest manifest;
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& e : doc["entries"]) {
    ++index;
    for (const char* key : {"infant_id", "session_id", "frames", "labels"}) {
      if (!e.contains(key) || !e[key].is_string()) {
        throw SchemaError(index, std::string("manifest entry missing string '") + key + "'");
      }
    }
    ManifestEntry entry;
    entry.infant_id = e["infant_id"].get<std::string>();
    entry.session_id = e["session_id"].get<std::string>();
    const auto resolve = [&](const std::string& p) {
      fs::path q(p);
      return q.is_absolute() ? q : base / q;
    };
    entry.frames_path = resolve(e["frames"].get<std::string>());
    entry.labels_path = resolve(e["labels"].get<std::string>());
    if (!seen.insert(entry.session_id).second) {
      throw SchemaError(index, "duplicate session_id '" + entry.session_id + "'");
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  json entries = json::array();
  const fs::path base = path.parent_path();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"infant_id", e.infant_id},
                       {"session_id", e.session_id},
                       {"frames", e.frames_path.lexically_relative(base).generic_string()},
                       {"labels", e.labels_path.lexically_relative(base).generic_string()}});
  }
  json doc = {{"entries", entries}};
  text::write_file_atomic(path, doc.dump(2) + "\n");
}

void attach_labels(std::vector<FrameRecord>& frames, const std::vector<LabelRow>& labels) {
  for (auto& f : frames) {
    auto it = std::upper_bound(labels.begin(), labels.end(), f.time_s,
                               [](double t, const LabelRow& row) { return t < row.time_s; });
    f.raw_label = it == labels.begin() ? std::string() : std::prev(it)->raw_label;
  }
}

Session load_session(const ManifestEntry& entry, const BinningOptions& options) {
  if (!fs::exists(entry.frames_path)) {
    throw MissingFrames("session '" + entry.session_id + "': frames file " +
                        entry.frames_path.string() + " not present");
  }
  if (!fs::exists(entry.labels_path)) {
    throw MissingLabels("session '" + entry.session_id + "': labels file " +
                        entry.labels_path.string() + " not present");
  }
  auto frames = parse_frames(entry.frames_path);
  for (const auto& f : frames) {
    if (f.session_id != entry.session_id) {
      throw MixedSession("frames file for '" + entry.session_id + "' contains session '" +
                         f.session_id + "'");
    }
  }
  attach_labels(frames, parse_labels(entry.labels_path));
  Session session;
  session.session_id = entry.session_id;
  session.infant_id = entry.infant_id;
  session.bins = bin_frames(frames, options);
  return session;
}

Dataset load_dataset(const DatasetManifest& manifest, const BinningOptions& options) {
  Dataset ds;
  for (const auto& entry : manifest.entries) {
    try {
      ds.sessions.push_back(load_session(entry, options));
    } catch (const SessionExcluded& e) {
      ds.excluded.push_back({entry, e.what()});
    }
  }
  return ds;
}

std::string format_frame_line(const FrameRecord& frame, std::optional<int> decimals) {
  std::string line;
  line.reserve(16 + frame.points.size() * 20 + frame.aus.size() * 12);
  const auto num = [&](double v, int fixed_digits) {
    line += ',';
    if (decimals) {
      text::append_fixed(line, v, fixed_digits);
    } else {
      text::append_shortest(line, v);
    }
  };
  line += frame.session_id;
  num(frame.time_s, decimals ? std::max(*decimals, 4) : 0);
  line += ',';
  line += to_string(frame.modality);
  num(frame.confidence, decimals ? std::max(*decimals, 4) : 0);
  for (const auto& p : frame.points) {
    num(p.x, decimals.value_or(0));
    num(p.y, decimals.value_or(0));
  }
  for (double au : frame.aus) num(au, decimals.value_or(0));
  line += '\n';
  return line;
}

void write_session(const Session& session, const fs::path& frames_path,
                   const fs::path& labels_path, double bin_width) {
  std::string frames;
  std::string labels;
  bool have_label = false;
  AffectLabel current = AffectLabel::Excluded;
  for (const auto& bin : session.bins) {
    const double t = static_cast<double>(bin.bin_index) * bin_width;
    const bool populated = bin.face_frames > 0 || bin.body_frames > 0;
    if (populated && (!have_label || bin.label != current)) {
      text::append_shortest(labels, t);
      labels += ',';
      labels += canonical_code(bin.label);
      labels += '\n';
      current = bin.label;
      have_label = true;
    }
    if (bin.face_frames > 0) {
      FrameRecord f{session.session_id, t, Modality::Face, bin.face_conf,
                    {bin.face_points.begin(), bin.face_points.end()},
                    {bin.face_aus.begin(), bin.face_aus.end()}, {}};
      frames += format_frame_line(f);
    }
    if (bin.body_frames > 0) {
      FrameRecord f{session.session_id, t, Modality::Body, bin.body_conf,
                    {bin.body_points.begin(), bin.body_points.end()}, {}, {}};
      frames += format_frame_line(f);
    }
  }
  text::write_file_atomic(frames_path, frames);
  text::write_file_atomic(labels_path, labels);
}

}  // namespace iaffect::ingest
