#include "iaffect/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "iaffect/error.hpp"
#include "iaffect/text.hpp"

namespace iaffect::eval {

using model::ModelKind;

int FoldAssignment::fold(const std::string& infant_id) const {
  const auto it = fold_of.find(infant_id);
  if (it == fold_of.end()) throw InsufficientData("infant '" + infant_id + "' has no fold");
  return it->second;
}

std::vector<std::vector<std::string>> FoldAssignment::members() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(k));
  for (const auto& [infant, f] : fold_of) out[static_cast<std::size_t>(f)].push_back(infant);
  return out;
}

FoldAssignment stratified_subject_folds(std::span<const InfantPrevalence> infants, int k,
                                        std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  if (infants.size() < static_cast<std::size_t>(k)) {
    throw TooFewInfants(std::to_string(infants.size()) + " infants cannot fill " +
                        std::to_string(k) + " folds");
  }
  std::vector<InfantPrevalence> order(infants.begin(), infants.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.fussy_fraction > b.fussy_fraction;
  });
  FoldAssignment out;
  out.k = k;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int round = static_cast<int>(i) / k;
    const int pos = static_cast<int>(i) % k;
    const int f = round % 2 == 0 ? pos : k - 1 - pos;
    if (!out.fold_of.emplace(order[i].infant_id, f).second) {
      throw ConfigError("duplicate infant id '" + order[i].infant_id + "'");
    }
  }
  return out;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw DimensionMismatch("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1..j share their mean.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        rank_sum += mid;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw SingleClass("AUC needs both classes");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double trace_auc(const PredictionTrace& trace, bool confident_only) {
  std::vector<double> scores;
  std::vector<std::uint8_t> positive;
  bool seen[2] = {false, false};
  for (const auto& e : trace) {
    if (confident_only && !e.confident) continue;
    const bool fussy = e.truth == AffectLabel::Fussy;
    scores.push_back(e.prob);
    positive.push_back(fussy);
    seen[fussy] = true;
  }
  if (!seen[0] || !seen[1]) return std::numeric_limits<double>::quiet_NaN();
  return auc(scores, positive);
}

double trace_accuracy(const PredictionTrace& trace, bool confident_only) {
  std::size_t n = 0;
  std::size_t correct = 0;
  for (const auto& e : trace) {
    if (confident_only && !e.confident) continue;
    ++n;
    correct += e.predicted == e.truth;
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                : static_cast<double>(correct) / static_cast<double>(n);
}

std::string_view to_string(CurveKind kind) { return kind == CurveKind::Tsat ? "tsat" : "tspt"; }

SessionLabels session_labels(std::span<const Session> sessions) {
  SessionLabels out;
  for (const auto& s : sessions) {
    auto& v = out[s.session_id];
    v.reserve(s.bins.size());
    for (const auto& b : s.bins) v.push_back(b.label);
  }
  return out;
}

std::int64_t elapsed_bin(double elapsed_s) {
  return static_cast<std::int64_t>(std::floor(elapsed_s / kBinWidth));
}

std::vector<std::int64_t> tsat_bins(const PredictionTrace& trace, const SessionLabels& labels) {
  std::map<std::string, std::vector<std::int64_t>> last_change;
  std::vector<std::int64_t> out(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace[i];
    auto it = last_change.find(e.session_id);
    if (it == last_change.end()) {
      const auto lab = labels.find(e.session_id);
      if (lab == labels.end()) {
        throw InsufficientData("no bin labels for session '" + e.session_id + "'");
      }
      std::vector<std::int64_t> change(lab->second.size(), 0);
      for (std::size_t b = 1; b < change.size(); ++b) {
        change[b] = lab->second[b] != lab->second[b - 1] ? static_cast<std::int64_t>(b) : change[b - 1];
      }
      it = last_change.emplace(e.session_id, std::move(change)).first;
    }
    if (e.end_bin < 0 || static_cast<std::size_t>(e.end_bin) >= it->second.size()) {
      throw WindowOutOfRange("trace entry beyond the session's bins");
    }
    out[i] = e.end_bin - it->second[static_cast<std::size_t>(e.end_bin)];
  }
  return out;
}

std::vector<std::int64_t> tspt_bins(const PredictionTrace& trace) {
  std::vector<std::size_t> order(trace.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (trace[a].session_id != trace[b].session_id) return trace[a].session_id < trace[b].session_id;
    return trace[a].end_bin < trace[b].end_bin;
  });
  std::vector<std::int64_t> out(trace.size());
  std::int64_t start = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& e = trace[order[k]];
    const TraceEntry* prev = k > 0 ? &trace[order[k - 1]] : nullptr;
    if (!prev || prev->session_id != e.session_id || prev->end_bin + 1 != e.end_bin ||
        prev->predicted != e.predicted) {
      start = e.end_bin;
    }
    out[order[k]] = e.end_bin - start;
  }
  return out;
}

std::pair<double, double> confidence_interval_95(std::span<const double> values) {
  if (values.empty()) throw InsufficientData("confidence interval of no values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    const double v = std::clamp(*lo, 0.0, 1.0);
    return {v, v};
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double half = 0.0;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    half = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return {std::clamp(mean - half, 0.0, 1.0), std::clamp(mean + half, 0.0, 1.0)};
}

namespace {

std::array<TemporalCurve, 2> build_curves(const PredictionTrace& trace,
                                          const std::vector<std::int64_t>& bins, CurveKind kind) {
  struct Tally {
    std::size_t n = 0;
    std::size_t correct = 0;
  };
  // (state, bin) -> infant -> tally
  std::map<std::pair<int, std::int64_t>, std::map<std::string, Tally>> groups;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace[i];
    const AffectLabel state = kind == CurveKind::Tsat ? e.truth : e.predicted;
    if (state == AffectLabel::Excluded) continue;
    auto& t = groups[{state == AffectLabel::Fussy ? 1 : 0, bins[i]}][e.infant_id];
    ++t.n;
    t.correct += e.predicted == e.truth;
  }
  std::array<TemporalCurve, 2> out;
  out[0] = {kind, AffectLabel::Alert, {}};
  out[1] = {kind, AffectLabel::Fussy, {}};
  std::vector<double> per_infant;
  for (const auto& [key, infants] : groups) {
    CurveBin cb;
    cb.bin = key.second;
    cb.bin_start_s = static_cast<double>(key.second) * kBinWidth;
    per_infant.clear();
    for (const auto& [id, t] : infants) {
      cb.n_samples += t.n;
      per_infant.push_back(static_cast<double>(t.correct) / static_cast<double>(t.n));
    }
    if (cb.n_samples <= 3) continue;
    cb.n_infants = per_infant.size();
    cb.mean_accuracy = std::accumulate(per_infant.begin(), per_infant.end(), 0.0) /
                       static_cast<double>(per_infant.size());
    std::tie(cb.ci_low, cb.ci_high) = confidence_interval_95(per_infant);
    out[static_cast<std::size_t>(key.first)].bins.push_back(cb);
  }
  return out;
}

}  // namespace

std::array<TemporalCurve, 2> tsat_curve(const PredictionTrace& trace, const SessionLabels& labels) {
  return build_curves(trace, tsat_bins(trace, labels), CurveKind::Tsat);
}

std::array<TemporalCurve, 2> tspt_curve(const PredictionTrace& trace) {
  return build_curves(trace, tspt_bins(trace), CurveKind::Tspt);
}

PreparedSession prepare_session(const Session& session, const windows::WindowConfig& window,
                                const preprocess::LandmarkConfig& landmarks) {
  PreparedSession out;
  out.index = windows::index_samples(session, windows::bin_validity(session, landmarks), window);
  const preprocess::FeatureColumns columns(session, landmarks);
  const std::size_t m = out.index.size();
  std::vector<std::uint8_t> include(m);
  for (std::size_t i = 0; i < m; ++i) include[i] = out.index.confident(i);
  const std::size_t short_bins = windows::seconds_to_bins(window.short_s);
  windows::RollingAggregator agg;
  std::vector<double> buf(6 * m);
  std::span<double> b(buf);
  for (auto g : kAllGroups) {
    auto& moments = out.moments[group_index(g)];
    const std::size_t width = columns.width(g);
    moments.resize(width * windows::kAggregatesPerFeature);
    const std::size_t long_bins = windows::seconds_to_bins(windows::long_window_for(g, window));
    for (std::size_t f = 0; f < width; ++f) {
      const auto col = columns.column(g, f);
      agg.run(col, short_bins, out.index.end_bins, window.population_std, b.subspan(0, m),
              b.subspan(m, m), b.subspan(2 * m, m));
      agg.run(col, long_bins, out.index.end_bins, window.population_std, b.subspan(3 * m, m),
              b.subspan(4 * m, m), b.subspan(5 * m, m));
      for (std::size_t kind = 0; kind < windows::kAggregatesPerFeature; ++kind) {
        select::accumulate_column(b.subspan(kind * m, m), out.index.labels, include,
                                  f * windows::kAggregatesPerFeature + kind, moments);
      }
    }
  }
  return out;
}

std::vector<double> extract_selected(const preprocess::FeatureColumns& columns,
                                     const windows::SampleIndex& index,
                                     const select::FeatureSelection& selection,
                                     const windows::WindowConfig& window) {
  std::size_t cols = 0;
  for (const auto& g : selection.groups) cols += g.chosen.size();
  const std::size_t m = index.size();
  std::vector<double> out(m * cols);
  if (m == 0) return out;
  const std::size_t short_bins = windows::seconds_to_bins(window.short_s);
  windows::RollingAggregator agg;
  std::vector<double> buf(3 * m);
  std::span<double> b(buf);
  std::size_t c = 0;
  for (auto g : kAllGroups) {
    const std::size_t long_bins = windows::seconds_to_bins(windows::long_window_for(g, window));
    for (const auto& stat : selection[g].chosen) {
      const std::size_t base = stat.index / windows::kAggregatesPerFeature;
      const std::size_t kind = stat.index % windows::kAggregatesPerFeature;
      if (base >= columns.width(g)) throw DimensionMismatch("selected feature outside its group");
      agg.run(columns.column(g, base), kind < 3 ? short_bins : long_bins, index.end_bins,
              window.population_std, b.subspan(0, m), b.subspan(m, m), b.subspan(2 * m, m));
      const double* src = buf.data() + (kind % 3) * m;
      for (std::size_t i = 0; i < m; ++i) out[i * cols + c] = src[i];
      ++c;
    }
  }
  return out;
}

double nan_mean(std::span<const double> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

double ModelResult::mean_auc_confident() const { return nan_mean(auc_confident); }
double ModelResult::mean_auc_total() const { return nan_mean(auc_total); }

const ModelResult& CvResult::result(ModelKind kind) const {
  for (const auto& m : models) {
    if (m.model == kind) return m;
  }
  throw ConfigError("model '" + std::string(model::to_string(kind)) + "' was not evaluated");
}

CvResult run_cv(std::span<const Session> sessions, const CvOptions& options) {
  windows::validate(options.window);
  model::validate(options.train);
  if (options.models.empty()) throw ConfigError("no models requested");

  CvResult result;
  // Sample index and moments per usable session.
  std::vector<std::optional<PreparedSession>> slots(sessions.size());
  std::vector<std::string> short_reason(sessions.size());
  parallel_for(sessions.size(), options.jobs, [&](std::size_t s) {
    try {
      slots[s] = prepare_session(sessions[s], options.window, options.landmarks);
      slots[s]->session = s;
    } catch (const SessionTooShort& e) {
      short_reason[s] = e.what();
    }
  });
  std::vector<PreparedSession> prepared;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    if (slots[s]) {
      prepared.push_back(std::move(*slots[s]));
    } else {
      result.skipped.push_back({sessions[s].session_id, short_reason[s]});
    }
  }
  slots.clear();

  // Stratify on each infant's fussy fraction over all of its samples.
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& p : prepared) {
    auto& c = counts[p.index.infant_id];
    for (auto l : p.index.labels) {
      c.first += l == AffectLabel::Fussy;
      ++c.second;
    }
  }
  std::vector<InfantPrevalence> prevalence;
  for (const auto& [id, c] : counts) {
    prevalence.push_back({id, c.second ? static_cast<double>(c.first) / static_cast<double>(c.second) : 0.0});
  }
  const int k = options.k;
  result.folds = stratified_subject_folds(prevalence, k, derive_seed(options.seed, 0x5eed));
  std::vector<int> fold_of(prepared.size());
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    fold_of[i] = result.folds.fold(prepared[i].index.infant_id);
  }

  // One selection per fold, from the training sessions' merged moments.
  const auto per_group = static_cast<std::size_t>(options.train.features_per_group);
  std::vector<select::FeatureSelection> selections(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    std::array<select::ClassMoments, 4> merged;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      if (fold_of[i] == f) continue;
      for (std::size_t g = 0; g < 4; ++g) merged[g].merge(prepared[i].moments[g]);
    }
    try {
      selections[static_cast<std::size_t>(f)] = select::select_from_moments(merged, per_group, f);
    } catch (const SingleClassFold& e) {
      throw SingleClassFold("fold " + std::to_string(f) + ": " + e.what());
    }
  }
  for (auto& p : prepared) p.moments = {};

  // Selected inputs of every session under every fold's selection.
  std::vector<std::vector<std::vector<double>>> rows(prepared.size());
  parallel_for(prepared.size(), options.jobs, [&](std::size_t i) {
    const preprocess::FeatureColumns columns(sessions[prepared[i].session], options.landmarks);
    rows[i].resize(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
      rows[i][static_cast<std::size_t>(f)] =
          extract_selected(columns, prepared[i].index, selections[static_cast<std::size_t>(f)],
                           options.window);
    }
  });

  // Networks to train: late fusion reuses the face and body networks.
  std::vector<ModelKind> base;
  const auto want = [&](ModelKind m) {
    return std::find(options.models.begin(), options.models.end(), m) != options.models.end();
  };
  const bool late = want(ModelKind::Late);
  for (auto m : {ModelKind::Face, ModelKind::Body, ModelKind::Joint}) {
    if (want(m) || (late && m != ModelKind::Joint)) base.push_back(m);
  }

  // probs[fold][base model][prepared session] -> per-sample probabilities
  const std::size_t n_tasks = static_cast<std::size_t>(k) * base.size();
  std::vector<std::vector<std::vector<double>>> probs(n_tasks);
  parallel_for(n_tasks, options.jobs, [&](std::size_t task) {
    const int f = static_cast<int>(task / base.size());
    const ModelKind kind = base[task % base.size()];
    const auto& sel = selections[static_cast<std::size_t>(f)];
    const auto groups = model::groups_for(kind);

    std::array<std::size_t, 4> offset{};
    std::size_t total_cols = 0;
    for (std::size_t g = 0; g < 4; ++g) {
      offset[g] = total_cols;
      total_cols += sel.groups[g].chosen.size();
    }
    std::vector<std::pair<std::size_t, std::size_t>> ranges;  // (offset, width)
    for (auto g : groups) ranges.push_back({offset[group_index(g)], sel[g].chosen.size()});
    const auto gather = [&](const std::vector<double>& src, std::size_t r, std::vector<double>& dst) {
      for (const auto& [off, w] : ranges) {
        const double* p = src.data() + r * total_cols + off;
        dst.insert(dst.end(), p, p + w);
      }
    };

    model::TrainingMatrix data;
    for (const auto& [off, w] : ranges) data.cols += w;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      if (fold_of[i] == f) continue;
      const auto& idx = prepared[i].index;
      const auto& src = rows[i][static_cast<std::size_t>(f)];
      for (std::size_t r = 0; r < idx.size(); ++r) {
        if (!idx.confident(r)) continue;
        gather(src, r, data.values);
        data.labels.push_back(idx.labels[r]);
        ++data.rows;
      }
    }
    model::TrainConfig cfg = options.train;
    cfg.seed = derive_seed(options.seed, static_cast<std::uint64_t>(f) + 1,
                           static_cast<std::uint64_t>(kind) + 1);
    model::GroupedModel net;
    try {
      net = model::train_selected(data, groups, sel, cfg);
    } catch (const SingleClassFold& e) {
      throw SingleClassFold("fold " + std::to_string(f) + ": " + e.what());
    }

    auto& out = probs[task];
    out.resize(prepared.size());
    std::vector<double> x;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      if (fold_of[i] != f) continue;
      const auto& src = rows[i][static_cast<std::size_t>(f)];
      out[i].resize(prepared[i].index.size());
      for (std::size_t r = 0; r < prepared[i].index.size(); ++r) {
        x.clear();
        gather(src, r, x);
        out[i][r] = model::predict(net, x).prob;
      }
    }
  });

  const auto base_probs = [&](int f, ModelKind kind, std::size_t i) -> const std::vector<double>& {
    const auto pos = static_cast<std::size_t>(std::find(base.begin(), base.end(), kind) - base.begin());
    return probs[static_cast<std::size_t>(f) * base.size() + pos][i];
  };

  for (auto kind : options.models) {
    ModelResult mr;
    mr.model = kind;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      const int f = fold_of[i];
      const auto& idx = prepared[i].index;
      for (std::size_t r = 0; r < idx.size(); ++r) {
        TraceEntry e;
        e.infant_id = idx.infant_id;
        e.session_id = idx.session_id;
        e.end_bin = idx.end_bins[r];
        e.truth = idx.labels[r];
        e.prob = kind == ModelKind::Late
                     ? model::late_fuse(base_probs(f, ModelKind::Face, i)[r],
                                        base_probs(f, ModelKind::Body, i)[r])
                     : base_probs(f, kind, i)[r];
        e.predicted = threshold_label(e.prob);
        e.confident = idx.confident(r);
        e.fold = f;
        mr.trace.push_back(std::move(e));
      }
    }
    for (int f = 0; f < k; ++f) {
      PredictionTrace fold_trace;
      for (const auto& e : mr.trace) {
        if (e.fold == f) fold_trace.push_back(e);
      }
      for (bool confident : {true, false}) {
        FoldMetric m;
        m.model = kind;
        m.fold = f;
        m.confident = confident;
        m.auc = trace_auc(fold_trace, confident);
        m.accuracy = trace_accuracy(fold_trace, confident);
        for (const auto& e : fold_trace) {
          if (confident && !e.confident) continue;
          ++m.n_samples;
          m.n_fussy += e.truth == AffectLabel::Fussy;
        }
        (confident ? mr.auc_confident : mr.auc_total).push_back(m.auc);
        result.metrics.push_back(m);
      }
    }
    result.models.push_back(std::move(mr));
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const FoldMetric> metrics) {
  std::string out = "model,fold,dataset,auc,accuracy,n_samples,n_fussy\n";
  for (const auto& m : metrics) {
    out += model::to_string(m.model);
    out += ',' + std::to_string(m.fold) + ',' + (m.confident ? "confident" : "total") + ',';
    text::append_g17(out, m.auc);
    out += ',';
    text::append_g17(out, m.accuracy);
    out += ',' + std::to_string(m.n_samples) + ',' + std::to_string(m.n_fussy) + '\n';
  }
  text::write_file_atomic(path, out);
}

void write_trace_csv(const std::filesystem::path& path,
                     std::span<const std::pair<ModelKind, const PredictionTrace*>> traces) {
  std::string out =
      "model,fold,infant_id,session_id,end_bin,end_time_s,truth,prob,predicted,confident\n";
  for (const auto& [kind, trace] : traces) {
    for (const auto& e : *trace) {
      out += model::to_string(kind);
      out += ',' + std::to_string(e.fold) + ',' + e.infant_id + ',' + e.session_id + ',' +
             std::to_string(e.end_bin) + ',';
      text::append_g17(out, static_cast<double>(e.end_bin + 1) * kBinWidth);
      out += ',';
      out += iaffect::to_string(e.truth);
      out += ',';
      text::append_g17(out, e.prob);
      out += ',';
      out += iaffect::to_string(e.predicted);
      out += e.confident ? ",1\n" : ",0\n";
    }
  }
  text::write_file_atomic(path, out);
}

void write_curves_csv(const std::filesystem::path& path,
                      std::span<const std::pair<ModelKind, std::array<TemporalCurve, 2>>> curves) {
  std::string out = "model,state,bin_start_s,mean_acc,ci_low,ci_high,n_samples,n_infants\n";
  for (const auto& [kind, pair] : curves) {
    for (const auto& curve : pair) {
      for (const auto& b : curve.bins) {
        out += model::to_string(kind);
        out += ',';
        out += iaffect::to_string(curve.state);
        out += ',';
        text::append_g17(out, b.bin_start_s);
        out += ',';
        text::append_g17(out, b.mean_accuracy);
        out += ',';
        text::append_g17(out, b.ci_low);
        out += ',';
        text::append_g17(out, b.ci_high);
        out += ',' + std::to_string(b.n_samples) + ',' + std::to_string(b.n_infants) + '\n';
      }
    }
  }
  text::write_file_atomic(path, out);
}

}  // namespace iaffect::eval
