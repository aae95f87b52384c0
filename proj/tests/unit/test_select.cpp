#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "iaffect/error.hpp"
#include "iaffect/select.hpp"

using namespace iaffect;
using namespace iaffect::select;

namespace {

/// Samples whose FaceDistances group holds `columns[f][i]` for sample i.
std::vector<windows::WindowedSample> make_samples(const std::vector<std::vector<double>>& columns,
                                                  const std::vector<AffectLabel>& labels) {
  std::vector<windows::WindowedSample> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i].label = labels[i];
    for (const auto& col : columns) out[i].groups[0].push_back(col[i]);
    out[i].groups[3] = {static_cast<double>(i % 3), static_cast<double>(i)};
  }
  return out;
}

}  // namespace

TEST_CASE("identical samples give t = 0") {
  const std::vector<double> a = {1, 2, 3};
  const auto w = welch_t(a, a);
  CHECK(w.t == 0.0);
  CHECK(w.df == doctest::Approx(4.0));
}

TEST_CASE("equal variances and sizes reduce to the pooled statistic") {
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {5, 6, 7, 8};
  const auto w = welch_t(a, b);
  const double pooled_var = (5.0 / 3.0 * 3 + 5.0 / 3.0 * 3) / 6.0;
  const double pooled_t = (2.5 - 6.5) / std::sqrt(pooled_var * (0.25 + 0.25));
  CHECK(w.t == doctest::Approx(pooled_t).epsilon(1e-14));
  CHECK(w.df == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("welch statistic matches a 50-digit reference") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n1(3.0, 2.0), n2(1.0, 0.5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(7), b(11);
    for (auto& x : a) x = n1(rng);
    for (auto& x : b) x = n2(rng);
    const auto w = welch_t(a, b);
    const auto ref = oracle::welch_reference(a, b);
    CHECK(w.t == doctest::Approx(ref.t).epsilon(1e-12));
    CHECK(w.df == doctest::Approx(ref.df).epsilon(1e-12));
  }
}

TEST_CASE("welch is antisymmetric and shift invariant") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(5 + rep % 7), b(4 + rep % 5);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng) + 1.0;
    const auto ab = welch_t(a, b);
    const auto ba = welch_t(b, a);
    CHECK(ab.t == -ba.t);
    CHECK(ab.df == ba.df);
    const double c = u(rng) * 10.0;
    auto as = a, bs = b;
    for (auto& x : as) x += c;
    for (auto& x : bs) x += c;
    const auto shifted = welch_t(as, bs);
    CHECK(std::abs(shifted.t - ab.t) <= 1e-12 * std::max(1.0, std::abs(ab.t)));
    CHECK(std::abs(shifted.df - ab.df) <= 1e-12 * std::max(1.0, ab.df));
  }
}

TEST_CASE("welch needs two values per sample and flags zero variance") {
  const std::vector<double> one = {1.0};
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS(welch_t(one, two), InsufficientData);
  const std::vector<double> z = {0, 0, 0};
  const auto w = welch_t(z, z);
  CHECK(w.zero_variance);
  CHECK(w.t == 0.0);
  CHECK(w.df == 4.0);
}

TEST_CASE("moments from summaries equal moments from data") {
  const std::vector<double> a = {0.3, 1.9, 2.2, 5.0, -1.0};
  const std::vector<double> b = {1.0, 1.5, 1.1, 0.7};
  Moments ma, mb;
  for (double x : a) ma.add(x);
  for (double x : b) mb.add(x);
  const auto w1 = welch_t(a, b);
  const auto w2 = welch_from_moments(ma.n, ma.mean, ma.sample_variance(), mb.n, mb.mean, mb.sample_variance());
  CHECK(w1.t == doctest::Approx(w2.t).epsilon(1e-13));
  CHECK(w1.df == doctest::Approx(w2.df).epsilon(1e-13));

  Moments left, right, all;
  for (std::size_t i = 0; i < a.size(); ++i) (i < 2 ? left : right).add(a[i]), all.add(a[i]);
  left.merge(right);
  CHECK(left.n == all.n);
  CHECK(left.mean == doctest::Approx(all.mean).epsilon(1e-15));
  CHECK(left.m2 == doctest::Approx(all.m2).epsilon(1e-14));
}

TEST_CASE("incomplete beta agrees with boost") {
  for (double a : {0.5, 1.0, 3.0, 25.0, 500.0}) {
    for (double b : {0.5, 2.0, 7.5, 400.0}) {
      for (double x : {0.0, 1e-6, 0.1, 0.5, 0.9, 0.999, 1.0}) {
        CHECK(regularized_incomplete_beta(a, b, x) ==
              doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-11).scale(1e-300));
      }
    }
  }
}

TEST_CASE("two-sided t tail probability") {
  for (double df : {1.0, 3.0, 100.0}) CHECK(t_sf_two_sided(0.0, df) == 1.0);
  CHECK(std::abs(t_sf_two_sided(1.959964, 1e6) - 0.05) < 1e-3);
  CHECK(std::abs(t_sf_two_sided(1.959964, 1e6) - std::erfc(1.959964 / std::sqrt(2.0))) < 1e-5);
  CHECK(std::abs(t_sf_two_sided(2.0, 10.0) - oracle::t_two_sided_quadrature(2.0, 10.0)) < 1e-8);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ut(-8.0, 8.0), ud(1.5, 400.0);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng), df = ud(rng);
    CHECK(std::abs(t_sf_two_sided(t, df) - oracle::t_two_sided_quadrature(t, df)) < 1e-8);
    CHECK(t_sf_two_sided(t, df) == t_sf_two_sided(-t, df));
  }
}

TEST_CASE("tail probability decreases in |t|") {
  for (double df : {1.0, 2.5, 30.0, 5000.0}) {
    double prev = 1.0;
    for (double t = 0.05; t < 40.0; t *= 1.3) {
      const double p = t_sf_two_sided(t, df);
      CHECK(p <= prev);
      CHECK(p > 0.0);
      prev = p;
    }
  }
}

TEST_CASE("small groups keep every candidate") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<AffectLabel> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i % 3 == 0 ? AffectLabel::Fussy : AffectLabel::Alert);
  std::vector<std::vector<double>> cols(5, std::vector<double>(labels.size()));
  for (auto& c : cols) for (auto& v : c) v = n(rng);
  const auto sel = select_top_k(make_samples(cols, labels), 12, 3);
  CHECK(sel.fold_id == 3);
  CHECK(sel[FeatureGroupId::FaceDistances].candidates == 5);
  CHECK(sel[FeatureGroupId::FaceDistances].chosen.size() == 5);
  CHECK(sel[FeatureGroupId::BodySpeeds].chosen.size() == 2);
  const auto& chosen = sel[FeatureGroupId::FaceDistances].chosen;
  for (std::size_t i = 1; i < chosen.size(); ++i) CHECK(chosen[i - 1].p <= chosen[i].p);
}

TEST_CASE("a label-separating feature ranks ahead of noise") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<AffectLabel> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i % 4 == 0 ? AffectLabel::Fussy : AffectLabel::Alert);
  std::vector<std::vector<double>> cols(2, std::vector<double>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    cols[0][i] = u(rng) + (labels[i] == AffectLabel::Fussy ? 5.0 : 0.0);
    cols[1][i] = u(rng);
  }
  // Noise first so the order is not an index accident.
  std::swap(cols[0], cols[1]);
  const auto sel = select_top_k(make_samples(cols, labels), 12);
  const auto& chosen = sel[FeatureGroupId::FaceDistances].chosen;
  REQUIRE(chosen.size() == 2);
  CHECK(chosen[0].index == 1);
  CHECK(chosen[0].t > 0.0);

  std::vector<double> fussy, alert;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == AffectLabel::Fussy ? fussy : alert).push_back(cols[1][i]);
  const auto w = welch_t(fussy, alert);
  CHECK(chosen[0].p == doctest::Approx(t_sf_two_sided(w.t, w.df)).epsilon(1e-10));
  CHECK(chosen[0].p < chosen[1].p);
}

TEST_CASE("identical columns tie-break on index and selection is deterministic") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<AffectLabel> labels;
  for (int i = 0; i < 50; ++i) labels.push_back(i % 5 == 0 ? AffectLabel::Fussy : AffectLabel::Alert);
  std::vector<std::vector<double>> cols(4, std::vector<double>(labels.size()));
  for (auto& v : cols[0]) v = n(rng);
  cols[2] = cols[0];
  for (auto& v : cols[1]) v = n(rng);
  for (auto& v : cols[3]) v = n(rng);
  const auto samples = make_samples(cols, labels);
  const auto a = select_top_k(samples, 12);
  const auto b = select_top_k(samples, 12);
  CHECK(a == b);
  const auto& chosen = a[FeatureGroupId::FaceDistances].chosen;
  for (std::size_t i = 0; i + 1 < chosen.size(); ++i) {
    if (chosen[i].index == 0) CHECK(chosen[i + 1].index == 2);
  }
}

TEST_CASE("constant columns get p = 1") {
  std::vector<AffectLabel> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(i % 2 ? AffectLabel::Fussy : AffectLabel::Alert);
  std::vector<std::vector<double>> cols = {std::vector<double>(20, 0.0), std::vector<double>(20, 0.0)};
  for (std::size_t i = 0; i < 20; ++i) cols[1][i] = static_cast<double>(i);
  const auto sel = select_top_k(make_samples(cols, labels), 1);
  REQUIRE(sel[FeatureGroupId::FaceDistances].chosen.size() == 1);
  CHECK(sel[FeatureGroupId::FaceDistances].chosen[0].index == 1);
  const auto all = select_top_k(make_samples(cols, labels), 2);
  CHECK(all[FeatureGroupId::FaceDistances].chosen[1].p == 1.0);
}

TEST_CASE("a fold with one class cannot be fitted") {
  std::vector<AffectLabel> labels(10, AffectLabel::Alert);
  labels[0] = AffectLabel::Fussy;
  std::vector<std::vector<double>> cols = {std::vector<double>(10, 1.0)};
  CHECK_THROWS_AS(select_top_k(make_samples(cols, labels)), SingleClassFold);
  CHECK_THROWS_AS(select_top_k(std::span<const windows::WindowedSample>{}), SingleClassFold);
}

TEST_CASE("selection from merged per-session moments matches selection from samples") {
  windows::WindowConfig cfg;
  cfg.long_face_s = 4.0;
  cfg.long_body_s = 2.0;
  cfg.max_long_s = 8.0;
  std::vector<windows::WindowedSample> pooled;
  std::array<ClassMoments, 4> merged;
  for (int s = 0; s < 3; ++s) {
    auto session = fixture::random_session(70, 40 + s, 9 + s, "s" + std::to_string(s));
    // Move the scale landmarks too; otherwise some distances are constant
    // and their statistics are pure rounding noise.
    std::mt19937_64 rng(s);
    std::uniform_int_distribution<int> jitter(-3, 3);
    for (auto& b : session.bins) {
      for (std::size_t i : {8, 19, 24}) b.face_points[i].x += jitter(rng);
      for (std::size_t i : {1, 8}) b.body_points[i].y += jitter(rng);
    }
    const auto samples = windows::build_samples(session, cfg);
    pooled.insert(pooled.end(), samples.begin(), samples.end());
    std::vector<AffectLabel> labels;
    for (const auto& x : samples) labels.push_back(x.label);
    const std::vector<std::uint8_t> include(samples.size(), 1);
    for (auto g : kAllGroups) {
      ClassMoments m;
      m.resize(samples[0][g].size());
      std::vector<double> col(samples.size());
      for (std::size_t f = 0; f < m.size(); ++f) {
        for (std::size_t i = 0; i < samples.size(); ++i) col[i] = samples[i][g][f];
        accumulate_column(col, labels, include, f, m);
      }
      if (s == 0) {
        merged[group_index(g)] = m;
      } else {
        merged[group_index(g)].merge(m);
      }
    }
  }
  const auto direct = select_top_k(pooled, 12, 0);
  const auto streamed = select_from_moments(merged, 12, 0);
  for (auto g : kAllGroups) {
    CHECK(direct[g].candidates == streamed[g].candidates);
    const auto& a = direct[g].chosen;
    const auto& b = streamed[g].chosen;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].p == doctest::Approx(b[i].p).epsilon(1e-9).scale(1e-300));
      CHECK(a[i].t == doctest::Approx(b[i].t).epsilon(1e-9));
    }
  }
}
