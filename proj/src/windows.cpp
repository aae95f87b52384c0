#include "iaffect/windows.hpp"

#include <algorithm>
#include <cmath>

#include "iaffect/error.hpp"

namespace iaffect::windows {

std::size_t seconds_to_bins(double seconds) {
  const double bins = seconds / kBinWidth;
  const double rounded = std::round(bins);
  if (!(rounded >= 1.0) || std::abs(bins - rounded) > 1e-9) {
    throw InvalidWindowConfig("window length " + std::to_string(seconds) +
                              " s is not a positive multiple of the bin width");
  }
  return static_cast<std::size_t>(rounded);
}

void validate(const WindowConfig& config) {
  const auto short_bins = seconds_to_bins(config.short_s);
  if (short_bins < 2) throw InvalidWindowConfig("short window must cover at least 2 bins (0.5 s)");
  const auto max_bins = seconds_to_bins(config.max_long_s);
  for (double l : {config.long_face_s, config.long_body_s}) {
    const auto b = seconds_to_bins(l);
    if (b < short_bins) throw InvalidWindowConfig("long window shorter than short window");
    if (b > max_bins) throw InvalidWindowConfig("long window exceeds max_long_s");
  }
  if (!(config.success_fraction >= 0.0 && config.success_fraction <= 1.0)) {
    throw InvalidWindowConfig("success_fraction must lie in [0,1]");
  }
}

Aggregate aggregate_scalar(std::span<const double> series, bool population_std) {
  if (series.empty()) throw EmptyWindow("aggregate over an empty window");
  Aggregate a;
  a.max = *std::max_element(series.begin(), series.end());
  double sum = 0.0;
  for (double v : series) sum += v;
  a.mean = sum / static_cast<double>(series.size());
  double ss = 0.0;
  for (double v : series) ss += (v - a.mean) * (v - a.mean);
  const double denom = static_cast<double>(series.size()) - (population_std ? 0.0 : 1.0);
  a.std = denom > 0.0 ? std::sqrt(ss / denom) : 0.0;
  return a;
}

std::vector<Aggregate> aggregate_window(std::span<const std::vector<double>> series,
                                        bool population_std) {
  if (series.empty()) throw EmptyWindow("aggregate over an empty window");
  const std::size_t width = series.front().size();
  std::vector<Aggregate> out(width);
  std::vector<double> column(series.size());
  for (std::size_t f = 0; f < width; ++f) {
    for (std::size_t t = 0; t < series.size(); ++t) {
      if (series[t].size() != width) throw LengthMismatch("ragged window");
      column[t] = series[t][f];
    }
    out[f] = aggregate_scalar(column, population_std);
  }
  return out;
}

void RollingAggregator::run(std::span<const double> series, std::size_t window,
                            std::span<const std::int64_t> end_bins, bool population_std,
                            std::span<double> max_out, std::span<double> mean_out,
                            std::span<double> std_out) {
  if (window == 0) throw EmptyWindow("zero-length window");
  if (end_bins.empty()) return;
  const std::size_t n = series.size();
  const auto last = static_cast<std::size_t>(end_bins.back());
  if (last >= n || static_cast<std::size_t>(end_bins.front()) + 1 < window) {
    throw WindowOutOfRange("rolling window outside the series");
  }
  // Shift by the first value to keep the prefix sums small.
  const long double shift = series[0];
  prefix_.assign(last + 2, 0.0L);
  prefix_sq_.assign(last + 2, 0.0L);
  for (std::size_t i = 0; i <= last; ++i) {
    const long double d = static_cast<long double>(series[i]) - shift;
    prefix_[i + 1] = prefix_[i] + d;
    prefix_sq_[i + 1] = prefix_sq_[i] + d * d;
  }
  max_q_.resize(last + 1);
  min_q_.resize(last + 1);
  std::size_t max_head = 0, max_tail = 0, min_head = 0, min_tail = 0;
  std::size_t next = 0;
  const long double w = static_cast<long double>(window);
  const long double denom = population_std ? w : w - 1.0L;
  for (std::size_t e = 0; e <= last && next < end_bins.size(); ++e) {
    const double v = series[e];
    while (max_tail > max_head && series[max_q_[max_tail - 1]] <= v) --max_tail;
    max_q_[max_tail++] = e;
    while (min_tail > min_head && series[min_q_[min_tail - 1]] >= v) --min_tail;
    min_q_[min_tail++] = e;
    if (e + 1 > window) {
      const std::size_t start = e + 1 - window;
      while (max_q_[max_head] < start) ++max_head;
      while (min_q_[min_head] < start) ++min_head;
    }
    if (static_cast<std::size_t>(end_bins[next]) != e) continue;
    const double hi = series[max_q_[max_head]];
    const double lo = series[min_q_[min_head]];
    const std::size_t start = e + 1 - window;
    double mean = hi;
    double sd = 0.0;
    if (hi != lo) {
      const long double s = prefix_[e + 1] - prefix_[start];
      const long double q = prefix_sq_[e + 1] - prefix_sq_[start];
      mean = std::clamp(static_cast<double>(shift + s / w), lo, hi);
      const long double m2 = std::max(0.0L, q - s * s / w);
      sd = denom > 0.0L ? static_cast<double>(std::sqrt(m2 / denom)) : 0.0;
    }
    max_out[next] = hi;
    mean_out[next] = mean;
    std_out[next] = sd;
    ++next;
  }
}

bool window_success(std::span<const std::uint8_t> valid, std::int64_t end_bin,
                    std::size_t window_bins, double success_fraction) {
  if (window_bins == 0 || end_bin < 0 || static_cast<std::size_t>(end_bin) >= valid.size() ||
      static_cast<std::size_t>(end_bin) + 1 < window_bins) {
    throw WindowOutOfRange("window ending at bin " + std::to_string(end_bin) + " of length " +
                           std::to_string(window_bins) + " does not fit");
  }
  std::size_t count = 0;
  for (std::size_t i = static_cast<std::size_t>(end_bin) + 1 - window_bins;
       i <= static_cast<std::size_t>(end_bin); ++i) {
    count += valid[i] ? 1 : 0;
  }
  // Slack so that e.g. 36 of 40 counts as exactly 90%.
  const double needed = success_fraction * static_cast<double>(window_bins);
  return static_cast<double>(count) >= needed - 1e-9;
}

bool window_success(const Session& session, std::int64_t end_bin, double long_s,
                    Modality modality, double success_fraction) {
  std::vector<std::uint8_t> valid(session.bins.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    valid[i] = modality == Modality::Face ? session.bins[i].face_valid : session.bins[i].body_valid;
  }
  return window_success(valid, end_bin, seconds_to_bins(long_s), success_fraction);
}

BinValidity bin_validity(const Session& session, const preprocess::LandmarkConfig& config) {
  BinValidity v;
  v.face.resize(session.bins.size());
  v.body.resize(session.bins.size());
  for (std::size_t i = 0; i < session.bins.size(); ++i) {
    const Bin& b = session.bins[i];
    v.face[i] = b.face_valid && preprocess::normalize_face(b.face_points, config).has_value();
    v.body[i] = b.body_valid && preprocess::normalize_body(b.body_points, config).has_value();
  }
  return v;
}

double long_window_for(FeatureGroupId group, const WindowConfig& config) {
  return modality_of(group) == Modality::Face ? config.long_face_s : config.long_body_s;
}

SampleIndex index_samples(const Session& session, const BinValidity& validity,
                          const WindowConfig& config) {
  validate(config);
  const std::size_t max_bins = seconds_to_bins(config.max_long_s);
  const std::size_t n = session.bins.size();
  if (n < max_bins) {
    throw SessionTooShort("session '" + session.session_id + "' has " + std::to_string(n) +
                          " bins, longest window needs " + std::to_string(max_bins));
  }
  SampleIndex idx;
  idx.infant_id = session.infant_id;
  idx.session_id = session.session_id;
  for (std::size_t e = max_bins - 1; e < n; ++e) {
    const AffectLabel label = session.bins[e].label;
    if (label == AffectLabel::Excluded) continue;
    const auto end = static_cast<std::int64_t>(e);
    idx.end_bins.push_back(end);
    idx.labels.push_back(label);
    idx.face_confident.push_back(window_success(validity.face, end, max_bins, config.success_fraction));
    idx.body_confident.push_back(window_success(validity.body, end, max_bins, config.success_fraction));
  }
  return idx;
}

std::vector<WindowedSample> build_samples(const Session& session, const WindowConfig& config,
                                          const preprocess::LandmarkConfig& landmarks) {
  const auto index = index_samples(session, bin_validity(session, landmarks), config);
  const preprocess::FeatureColumns columns(session, landmarks);
  std::vector<WindowedSample> samples(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    auto& s = samples[i];
    s.infant_id = index.infant_id;
    s.session_id = index.session_id;
    s.end_bin = index.end_bins[i];
    s.label = index.labels[i];
    s.face_confident = index.face_confident[i];
    s.body_confident = index.body_confident[i];
  }
  if (index.size() == 0) return samples;

  const std::size_t short_bins = seconds_to_bins(config.short_s);
  RollingAggregator agg;
  const std::size_t m = index.size();
  std::vector<double> buf(6 * m);
  for (auto g : kAllGroups) {
    const std::size_t width = columns.width(g);
    const std::size_t long_bins = seconds_to_bins(long_window_for(g, config));
    for (auto& s : samples) s.groups[group_index(g)].assign(width * kAggregatesPerFeature, 0.0);
    for (std::size_t f = 0; f < width; ++f) {
      const auto col = columns.column(g, f);
      std::span<double> out(buf);
      agg.run(col, short_bins, index.end_bins, config.population_std, out.subspan(0, m),
              out.subspan(m, m), out.subspan(2 * m, m));
      agg.run(col, long_bins, index.end_bins, config.population_std, out.subspan(3 * m, m),
              out.subspan(4 * m, m), out.subspan(5 * m, m));
      for (std::size_t i = 0; i < m; ++i) {
        auto& v = samples[i].groups[group_index(g)];
        for (std::size_t kind = 0; kind < kAggregatesPerFeature; ++kind) {
          v[f * kAggregatesPerFeature + kind] = buf[kind * m + i];
        }
      }
    }
  }
  return samples;
}

Partition partition(std::span<const WindowedSample> samples) {
  Partition p;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    p.total.push_back(i);
    if (samples[i].face_confident && samples[i].body_confident) p.confident.push_back(i);
  }
  return p;
}

}  // namespace iaffect::windows
