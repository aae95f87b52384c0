#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "iaffect/preprocess.hpp"
#include "iaffect/windows.hpp"

namespace iaffect::select {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  /// Both sample variances were zero; t = 0 and df = n_a + n_b - 2.
  bool zero_variance = false;
};

/// Welch's unequal-variances t statistic with Welch-Satterthwaite degrees
/// of freedom. Throws InsufficientData when either sample has < 2 values.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

/// Same statistic from summary moments (sample variances, n-1 divisor).
WelchResult welch_from_moments(double n_a, double mean_a, double var_a, double n_b, double mean_b,
                               double var_b);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided Student-t tail probability 2 P(T_df >= |t|).
double t_sf_two_sided(double t, double df);

/// Count, mean and sum of squared deviations; merges exactly like a single
/// pass over the union (Chan et al. pairwise update).
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const Moments& other);
  double sample_variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
};

/// Per-class moments of every candidate feature of one group.
struct ClassMoments {
  std::vector<Moments> alert;
  std::vector<Moments> fussy;

  std::size_t size() const { return alert.size(); }
  void resize(std::size_t n) {
    alert.assign(n, {});
    fussy.assign(n, {});
  }
  void merge(const ClassMoments& other);
};

/// Two-pass moments of one feature column restricted to the rows in
/// `rows`, split by label. Appends into slot `feature` of `out`.
void accumulate_column(std::span<const double> values, std::span<const AffectLabel> labels,
                       std::span<const std::uint8_t> include, std::size_t feature,
                       ClassMoments& out);

struct FeatureStat {
  std::size_t index = 0;  // aggregate-feature index within the group
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

struct GroupSelection {
  std::size_t candidates = 0;
  std::vector<FeatureStat> chosen;  // ascending p

  std::vector<std::size_t> indices() const;
};

struct FeatureSelection {
  int fold_id = -1;
  std::array<GroupSelection, 4> groups;

  const GroupSelection& operator[](FeatureGroupId g) const { return groups[group_index(g)]; }
  GroupSelection& operator[](FeatureGroupId g) { return groups[group_index(g)]; }
  friend bool operator==(const FeatureSelection&, const FeatureSelection&);
};

bool operator==(const FeatureStat& a, const FeatureStat& b);

/// Ranks one group's candidates by ascending p, then larger |t|, then
/// smaller index, and keeps the first k.
GroupSelection rank_group(const ClassMoments& moments, std::size_t k);

/// Fits the selection on a training fold. Throws SingleClassFold unless
/// both labels have at least two samples.
FeatureSelection select_top_k(std::span<const windows::WindowedSample> samples, std::size_t k = 12,
                              int fold_id = -1);
FeatureSelection select_from_moments(const std::array<ClassMoments, 4>& moments, std::size_t k,
                                     int fold_id = -1);

}  // namespace iaffect::select
