#include "iaffect/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iaffect/error.hpp"

namespace iaffect::select {

WelchResult welch_from_moments(double n_a, double mean_a, double var_a, double n_b, double mean_b,
                               double var_b) {
  if (n_a < 2.0 || n_b < 2.0) throw InsufficientData("Welch's t-test needs two values per sample");
  const double qa = var_a / n_a;
  const double qb = var_b / n_b;
  const double se2 = qa + qb;
  WelchResult r;
  if (!(se2 > 0.0)) {
    r.zero_variance = true;
    r.t = 0.0;
    r.df = n_a + n_b - 2.0;
    return r;
  }
  r.t = (mean_a - mean_b) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (n_a - 1.0) + qb * qb / (n_b - 1.0));
  return r;
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InsufficientData("Welch's t-test needs two values per sample");
  }
  const auto moments = [](std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  return welch_from_moments(static_cast<double>(a.size()), ma, va, static_cast<double>(b.size()),
                            mb, vb);
}

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_sf_two_sided(double t, double df) {
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

void Moments::add(double x) {
  n += 1.0;
  const double delta = x - mean;
  mean += delta / n;
  m2 += delta * (x - mean);
}

void Moments::merge(const Moments& other) {
  if (other.n == 0.0) return;
  if (n == 0.0) {
    *this = other;
    return;
  }
  const double total = n + other.n;
  const double delta = other.mean - mean;
  mean += delta * other.n / total;
  m2 += other.m2 + delta * delta * n * other.n / total;
  n = total;
}

void ClassMoments::merge(const ClassMoments& other) {
  if (size() == 0) {
    *this = other;
    return;
  }
  if (other.size() != size()) throw DimensionMismatch("merging moments of different widths");
  for (std::size_t i = 0; i < size(); ++i) {
    alert[i].merge(other.alert[i]);
    fussy[i].merge(other.fussy[i]);
  }
}

void accumulate_column(std::span<const double> values, std::span<const AffectLabel> labels,
                       std::span<const std::uint8_t> include, std::size_t feature,
                       ClassMoments& out) {
  std::array<double, 2> n{}, sum{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!include[i] || labels[i] == AffectLabel::Excluded) continue;
    const int c = labels[i] == AffectLabel::Fussy;
    n[c] += 1.0;
    sum[c] += values[i];
  }
  std::array<double, 2> mean{};
  for (int c = 0; c < 2; ++c) mean[c] = n[c] > 0.0 ? sum[c] / n[c] : 0.0;
  std::array<double, 2> m2{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!include[i] || labels[i] == AffectLabel::Excluded) continue;
    const int c = labels[i] == AffectLabel::Fussy;
    const double d = values[i] - mean[c];
    m2[c] += d * d;
  }
  out.alert[feature].merge({n[0], mean[0], m2[0]});
  out.fussy[feature].merge({n[1], mean[1], m2[1]});
}

std::vector<std::size_t> GroupSelection::indices() const {
  std::vector<std::size_t> out;
  out.reserve(chosen.size());
  for (const auto& c : chosen) out.push_back(c.index);
  return out;
}

bool operator==(const FeatureStat& a, const FeatureStat& b) {
  return a.index == b.index && a.t == b.t && a.df == b.df && a.p == b.p;
}

bool operator==(const FeatureSelection& a, const FeatureSelection& b) {
  if (a.fold_id != b.fold_id) return false;
  for (std::size_t g = 0; g < 4; ++g) {
    if (a.groups[g].candidates != b.groups[g].candidates || a.groups[g].chosen != b.groups[g].chosen) {
      return false;
    }
  }
  return true;
}

GroupSelection rank_group(const ClassMoments& moments, std::size_t k) {
  GroupSelection sel;
  sel.candidates = moments.size();
  std::vector<FeatureStat> stats(moments.size());
  for (std::size_t i = 0; i < moments.size(); ++i) {
    const auto& a = moments.alert[i];
    const auto& f = moments.fussy[i];
    // Fussy minus Alert, so positive t means the feature rises when fussy.
    const auto w = welch_from_moments(f.n, f.mean, f.sample_variance(), a.n, a.mean,
                                      a.sample_variance());
    stats[i] = {i, w.t, w.df, w.zero_variance ? 1.0 : t_sf_two_sided(w.t, w.df)};
  }
  const std::size_t keep = std::min(k, stats.size());
  std::partial_sort(stats.begin(), stats.begin() + static_cast<std::ptrdiff_t>(keep), stats.end(),
                    [](const FeatureStat& x, const FeatureStat& y) {
                      if (x.p != y.p) return x.p < y.p;
                      if (std::abs(x.t) != std::abs(y.t)) return std::abs(x.t) > std::abs(y.t);
                      return x.index < y.index;
                    });
  stats.resize(keep);
  sel.chosen = std::move(stats);
  return sel;
}

FeatureSelection select_from_moments(const std::array<ClassMoments, 4>& moments, std::size_t k,
                                     int fold_id) {
  FeatureSelection sel;
  sel.fold_id = fold_id;
  for (std::size_t g = 0; g < 4; ++g) {
    const auto& m = moments[g];
    if (m.size() == 0) continue;
    if (m.alert[0].n < 2.0 || m.fussy[0].n < 2.0) {
      throw SingleClassFold("training fold has " + std::to_string(m.alert[0].n) + " alert and " +
                            std::to_string(m.fussy[0].n) + " fussy samples");
    }
    sel.groups[g] = rank_group(m, k);
  }
  return sel;
}

FeatureSelection select_top_k(std::span<const windows::WindowedSample> samples, std::size_t k,
                              int fold_id) {
  std::array<ClassMoments, 4> moments;
  std::vector<AffectLabel> labels(samples.size());
  std::vector<std::uint8_t> include(samples.size(), 1);
  for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;
  std::vector<double> column(samples.size());
  for (auto g : kAllGroups) {
    const std::size_t gi = group_index(g);
    const std::size_t width = samples.empty() ? 0 : samples.front().groups[gi].size();
    moments[gi].resize(width);
    for (std::size_t f = 0; f < width; ++f) {
      for (std::size_t i = 0; i < samples.size(); ++i) column[i] = samples[i].groups[gi][f];
      accumulate_column(column, labels, include, f, moments[gi]);
    }
  }
  if (samples.empty()) throw SingleClassFold("empty training fold");
  return select_from_moments(moments, k, fold_id);
}

}  // namespace iaffect::select
