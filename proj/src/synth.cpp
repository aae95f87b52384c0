#include "iaffect/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "iaffect/error.hpp"
#include "iaffect/text.hpp"

namespace iaffect::synth {

namespace {

constexpr std::array<std::size_t, 8> kFussyAus = {2, 4, 5, 6, 7, 12, 14, 15};
constexpr double kTimeQuantum = 1e-4;  // timestamps are written with 4 decimals
constexpr int kCoordinateDecimals = 3;

// Unit face (y down, roughly 1 unit from brow to chin) in the 68-point
// layout: jaw 0-16, brows 17-26, nose 27-35, eyes 36-47, mouth 48-67.
std::array<Point2, kFacePoints> face_template() {
  std::array<Point2, kFacePoints> p{};
  const double pi = std::numbers::pi;
  for (int i = 0; i <= 16; ++i) {
    const double th = pi * i / 16.0;
    p[i] = {-0.5 * std::cos(th), 0.6 * std::sin(th)};
  }
  for (int i = 0; i < 5; ++i) {
    const double arch = 0.04 * std::sin(pi * i / 4.0);
    p[17 + i] = {-0.4 + 0.075 * i, -0.35 - arch};
    p[26 - i] = {0.4 - 0.075 * i, -0.35 - arch};
  }
  for (int i = 0; i < 4; ++i) p[27 + i] = {0.0, -0.25 + 0.1 * i};
  for (int i = 0; i < 5; ++i) p[31 + i] = {-0.1 + 0.05 * i, 0.12};
  for (int e = 0; e < 2; ++e) {
    const double cx = e == 0 ? -0.22 : 0.22;
    for (int i = 0; i < 6; ++i) {
      const double th = pi + 2.0 * pi * i / 6.0;
      p[36 + 6 * e + i] = {cx + 0.08 * std::cos(th), -0.2 + 0.04 * std::sin(th)};
    }
  }
  for (int i = 0; i < 12; ++i) {
    const double th = pi + 2.0 * pi * i / 12.0;
    p[48 + i] = {0.2 * std::cos(th), 0.33 + 0.07 * std::sin(th)};
  }
  for (int i = 0; i < 8; ++i) {
    const double th = pi + 2.0 * pi * i / 8.0;
    p[60 + i] = {0.12 * std::cos(th), 0.33 + 0.03 * std::sin(th)};
  }
  return p;
}

// Seated infant in pixels relative to the neck, 25-point body layout.
std::array<Point2, kBodyPoints> body_template() {
  return {{{0, -40},  {0, 0},    {-35, 5},  {-45, 45},  {-30, 80},  {35, 5},    {45, 45},
           {30, 80},  {0, 90},   {-15, 90}, {-25, 130}, {-25, 170}, {15, 90},   {25, 130},
           {25, 170}, {-8, -48}, {8, -48},  {-18, -42}, {18, -42},  {30, 180},  {35, 178},
           {22, 175}, {-30, 180}, {-35, 178}, {-22, 175}}};
}

bool lower_lip(std::size_t i) { return (i >= 55 && i <= 59) || (i >= 65 && i <= 67); }
bool upper_lip(std::size_t i) { return (i >= 49 && i <= 53) || (i >= 61 && i <= 63); }

double quantize_time(double t) { return std::round(t / kTimeQuantum) * kTimeQuantum; }

struct Segment {
  double start = 0.0;
  double target = 0.0;       // fussy intensity the segment ramps towards
  double start_level = 0.0;  // intensity at the segment start
};

class Intensity {
 public:
  Intensity(std::vector<Segment> segments, double ramp) : segs_(std::move(segments)), ramp_(ramp) {}

  double at(double t) const {
    auto it = std::upper_bound(segs_.begin(), segs_.end(), t,
                               [](double v, const Segment& s) { return v < s.start; });
    const Segment& s = *std::prev(it);
    return level(s, t);
  }
  double level(const Segment& s, double t) const {
    if (ramp_ <= 0.0) return s.target;
    const double w = std::max(0.0, 1.0 - (t - s.start) / ramp_);
    return s.target + (s.start_level - s.target) * w;
  }

 private:
  std::vector<Segment> segs_;
  double ramp_;
};

double draw_dwell(std::mt19937_64& rng, double mean, double shape) {
  std::gamma_distribution<double> dist(shape, mean / shape);
  return dist(rng);
}

// Alternating visible/occluded renewal process snapped to bins.
std::vector<std::uint8_t> occlusion_mask(std::mt19937_64& rng, const OcclusionConfig& occ,
                                         std::size_t n_bins) {
  std::vector<std::uint8_t> mask(n_bins, 0);
  if (occ.rate_per_min <= 0.0) return mask;
  std::exponential_distribution<double> visible(occ.rate_per_min / 60.0);
  std::exponential_distribution<double> burst(1.0 / occ.mean_burst_s);
  const double end = static_cast<double>(n_bins) * kBinWidth;
  double t = visible(rng);
  while (t < end) {
    const double len = burst(rng);
    const auto b0 = static_cast<std::int64_t>(std::llround(t / kBinWidth));
    const auto b1 = static_cast<std::int64_t>(std::llround((t + len) / kBinWidth));
    for (std::int64_t b = std::max<std::int64_t>(b0, 0);
         b < std::min<std::int64_t>(b1, static_cast<std::int64_t>(n_bins)); ++b) {
      mask[static_cast<std::size_t>(b)] = 1;
    }
    t += len + visible(rng);
  }
  return mask;
}

}  // namespace

void validate(const SynthConfig& c) {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  if (c.n_infants < 1) throw ConfigError("n_infants must be >= 1");
  positive(c.session_s, "session_s");
  positive(c.dwell_alert_s, "dwell_alert_s");
  positive(c.dwell_fussy_s, "dwell_fussy_s");
  positive(c.dwell_shape, "dwell_shape");
  positive(c.body_fps, "body_fps");
  positive(c.face_fps_min, "face_fps_min");
  positive(c.face_fps_max, "face_fps_max");
  positive(c.face_noise_px, "face_noise_px");
  positive(c.body_noise_px, "body_noise_px");
  positive(c.au_noise, "au_noise");
  positive(c.face_occlusion.mean_burst_s, "face_occlusion.mean_burst_s");
  positive(c.body_occlusion.mean_burst_s, "body_occlusion.mean_burst_s");
  if (c.face_fps_min > c.face_fps_max) throw ConfigError("face_fps_min exceeds face_fps_max");
  if (!(c.transition_ramp_s >= 0.0)) throw ConfigError("transition_ramp_s must be >= 0");
  if (!(c.crying_fraction >= 0.0 && c.crying_fraction <= 1.0)) {
    throw ConfigError("crying_fraction must lie in [0,1]");
  }
  if (!(c.face_occlusion.rate_per_min >= 0.0) || !(c.body_occlusion.rate_per_min >= 0.0)) {
    throw ConfigError("occlusion rates must be >= 0");
  }
  for (double e : {c.effects.face_distances, c.effects.face_aus, c.effects.body_distances,
                   c.effects.body_speeds}) {
    if (!std::isfinite(e)) throw ConfigError("effect sizes must be finite");
  }
  if (c.effects.body_speeds <= -1.0) throw ConfigError("body_speeds effect must exceed -1");
  const double bins = c.session_s / kBinWidth;
  if (std::abs(bins - std::round(bins)) > 1e-9) {
    throw ConfigError("session_s must be a multiple of the bin width");
  }
}

double stationary_alert_fraction(const SynthConfig& c) {
  return c.dwell_alert_s / (c.dwell_alert_s + c.dwell_fussy_s);
}

std::uint64_t infant_seed(const SynthConfig& config, std::size_t infant_index) {
  return derive_seed(config.seed, infant_index);
}

std::string infant_name(std::size_t infant_index) {
  std::string digits = std::to_string(infant_index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "infant_" + digits;
}

GeneratedSession generate_session(const SynthConfig& config, std::size_t infant_index) {
  validate(config);
  std::mt19937_64 rng(infant_seed(config, infant_index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> normal(0.0, 1.0);

  GeneratedSession out;
  auto& truth = out.truth;
  truth.infant_id = infant_name(infant_index);
  truth.session_id = truth.infant_id + "_s0";
  const auto n_bins = static_cast<std::size_t>(std::llround(config.session_s / kBinWidth));

  // Per-infant appearance.
  const double face_scale = 120.0 * uniform(0.85, 1.15);
  const Point2 face_origin{320.0 + uniform(-40, 40), 220.0 + uniform(-30, 30)};
  const double body_scale = uniform(0.85, 1.15);
  const Point2 body_origin{320.0 + uniform(-40, 40), 240.0 + uniform(-30, 30)};
  auto face = face_template();
  for (auto& p : face) {
    p.x += 0.015 * normal(rng);
    p.y += 0.015 * normal(rng);
  }
  auto body = body_template();
  for (auto& p : body) {
    p.x += 3.0 * normal(rng);
    p.y += 3.0 * normal(rng);
  }
  std::array<double, kActionUnits> au_base{};
  for (auto& a : au_base) a = uniform(0.2, 1.2);
  struct Sway {
    double amp, period, phase;
  };
  const Sway face_sway{uniform(2, 6), uniform(3, 8), uniform(0, 2 * std::numbers::pi)};
  const Sway body_sway{uniform(2, 6), uniform(3, 8), uniform(0, 2 * std::numbers::pi)};
  const auto sway = [](const Sway& s, double t) {
    return s.amp * std::sin(2.0 * std::numbers::pi * t / s.period + s.phase);
  };

  // State path: alternating dwell times, transitions snapped to the grid.
  AffectLabel state = unit(rng) < stationary_alert_fraction(config) ? AffectLabel::Alert
                                                                     : AffectLabel::Fussy;
  AffectLabel initial = state;
  std::vector<Transition> transitions;
  double t = 0.0;
  for (;;) {
    t += draw_dwell(rng, state == AffectLabel::Alert ? config.dwell_alert_s : config.dwell_fussy_s,
                    config.dwell_shape);
    const double snapped = std::round(t / kBinWidth) * kBinWidth;
    if (snapped >= config.session_s) break;
    const AffectLabel next = state == AffectLabel::Alert ? AffectLabel::Fussy : AffectLabel::Alert;
    if (!transitions.empty() && transitions.back().time_s == snapped) {
      transitions.pop_back();
      truth.collapsed += 2;
    } else if (transitions.empty() && snapped == 0.0) {
      initial = next;
      truth.collapsed += 1;
    } else {
      transitions.push_back({snapped, state, next});
    }
    state = next;
  }
  truth.transitions = transitions;
  truth.bin_states.resize(n_bins);
  {
    AffectLabel s = initial;
    std::size_t next = 0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double start = static_cast<double>(b) * kBinWidth;
      while (next < transitions.size() && transitions[next].time_s <= start) {
        s = transitions[next++].to;
      }
      truth.bin_states[b] = s;
    }
  }

  // Labels file, one row per episode; fussy episodes are sometimes coded crying.
  const auto code = [&](AffectLabel l) -> std::string {
    if (l == AffectLabel::Alert) return "alert";
    return unit(rng) < config.crying_fraction ? "crying" : "fussy";
  };
  out.labels_text = "0," + code(initial) + "\n";
  for (const auto& tr : transitions) {
    text::append_shortest(out.labels_text, tr.time_s);
    out.labels_text += ',' + code(tr.to) + '\n';
  }

  std::vector<Segment> segments;
  const auto target_of = [](AffectLabel l) { return l == AffectLabel::Fussy ? 1.0 : 0.0; };
  segments.push_back({0.0, target_of(initial), target_of(initial)});
  for (const auto& tr : transitions) {
    const Intensity so_far(segments, config.transition_ramp_s);
    segments.push_back({tr.time_s, target_of(tr.to), so_far.level(segments.back(), tr.time_s)});
  }
  const Intensity intensity(std::move(segments), config.transition_ramp_s);

  truth.face_occluded = occlusion_mask(rng, config.face_occlusion, n_bins);
  truth.body_occluded = occlusion_mask(rng, config.body_occlusion, n_bins);
  const auto occluded = [&](const std::vector<std::uint8_t>& mask, double time) {
    const auto b = static_cast<std::size_t>(bin_index_for(time));
    return b < mask.size() && mask[b];
  };

  const double mouth_shift = config.effects.face_distances * config.face_noise_px / face_scale;
  const double arm_shift = config.effects.body_distances * config.body_noise_px;

  struct Line {
    double time;
    std::string text;
  };
  std::vector<Line> lines;
  FrameRecord frame;
  frame.session_id = truth.session_id;

  // Face stream at a jittered 20-30 fps.
  frame.modality = Modality::Face;
  frame.points.assign(kFacePoints, {});
  frame.aus.assign(kActionUnits, 0.0);
  for (double tf = 0.0; quantize_time(tf) < config.session_s;
       tf += uniform(1.0 / config.face_fps_max, 1.0 / config.face_fps_min)) {
    const double tq = quantize_time(tf);
    frame.time_s = tq;
    if (occluded(truth.face_occluded, tq)) {
      frame.confidence = uniform(0.0, 0.15);
      std::fill(frame.points.begin(), frame.points.end(), Point2{});
      std::fill(frame.aus.begin(), frame.aus.end(), 0.0);
    } else {
      frame.confidence = uniform(0.7, 0.98);
      const double level = intensity.at(tq);
      const double dx = sway(face_sway, tq);
      const double dy = 0.5 * sway(face_sway, tq + 1.0);
      for (std::size_t i = 0; i < kFacePoints; ++i) {
        Point2 p = face[i];
        if (lower_lip(i)) p.y += level * mouth_shift;
        if (upper_lip(i)) p.y -= 0.5 * level * mouth_shift;
        frame.points[i] = {face_origin.x + dx + face_scale * p.x + config.face_noise_px * normal(rng),
                           face_origin.y + dy + face_scale * p.y + config.face_noise_px * normal(rng)};
      }
      for (std::size_t j = 0; j < kActionUnits; ++j) {
        double v = au_base[j] + config.au_noise * normal(rng);
        if (std::find(kFussyAus.begin(), kFussyAus.end(), j) != kFussyAus.end()) {
          v += level * config.effects.face_aus * config.au_noise;
        }
        frame.aus[j] = std::max(0.0, v);
      }
    }
    lines.push_back({tq, ingest::format_frame_line(frame, kCoordinateDecimals)});
  }

  // Body stream at a fixed rate.
  frame.modality = Modality::Body;
  frame.points.assign(kBodyPoints, {});
  frame.aus.clear();
  for (std::size_t i = 0;; ++i) {
    const double tq = quantize_time(static_cast<double>(i) / config.body_fps);
    if (tq >= config.session_s) break;
    frame.time_s = tq;
    if (occluded(truth.body_occluded, tq)) {
      frame.confidence = uniform(0.0, 0.15);
      std::fill(frame.points.begin(), frame.points.end(), Point2{});
    } else {
      frame.confidence = uniform(0.7, 0.98);
      const double level = intensity.at(tq);
      const double jitter = config.body_noise_px * (1.0 + level * config.effects.body_speeds);
      const double dx = sway(body_sway, tq);
      const double dy = 0.5 * sway(body_sway, tq + 1.0);
      for (std::size_t k = 0; k < kBodyPoints; ++k) {
        Point2 p = body[k];
        if (k == 4 || k == 7) p.y -= 2.0 * level * arm_shift;
        if (k == 3) p.x -= level * arm_shift;
        if (k == 6) p.x += level * arm_shift;
        if (k == 3 || k == 6) p.y -= level * arm_shift;
        frame.points[k] = {body_origin.x + dx + body_scale * p.x + jitter * normal(rng),
                           body_origin.y + dy + body_scale * p.y + jitter * normal(rng)};
      }
    }
    lines.push_back({tq, ingest::format_frame_line(frame, kCoordinateDecimals)});
  }

  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return a.time < b.time; });
  std::size_t total = 0;
  for (const auto& l : lines) total += l.text.size();
  out.frames_text.reserve(total);
  for (const auto& l : lines) out.frames_text += l.text;
  return out;
}

GeneratedDataset generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir,
                                  int jobs) {
  validate(config);
  if (config.n_infants < 5) {
    throw TooFewInfants("synthetic dataset needs at least 5 infants for 5-fold evaluation, got " +
                        std::to_string(config.n_infants));
  }
  GeneratedDataset out;
  const auto n = static_cast<std::size_t>(config.n_infants);
  out.manifest.entries.resize(n);
  out.truth.resize(n);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DiskError("cannot create " + out_dir.string() + ": " + ec.message());
  parallel_for(n, jobs, [&](std::size_t i) {
    auto session = generate_session(config, i);
    auto& entry = out.manifest.entries[i];
    entry.infant_id = session.truth.infant_id;
    entry.session_id = session.truth.session_id;
    entry.frames_path = out_dir / (entry.infant_id + ".frames.csv");
    entry.labels_path = out_dir / (entry.infant_id + ".labels.csv");
    text::write_file_atomic(entry.frames_path, session.frames_text);
    text::write_file_atomic(entry.labels_path, session.labels_text);
    out.truth[i] = std::move(session.truth);
  });
  out.manifest_path = out_dir / "manifest.json";
  ingest::write_manifest(out.manifest, out.manifest_path);
  return out;
}

}  // namespace iaffect::synth
