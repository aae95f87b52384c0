#include "iaffect/cli.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "json.hpp"

#include "iaffect/error.hpp"
#include "iaffect/ingest.hpp"
#include "iaffect/text.hpp"

namespace iaffect::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using model::ModelKind;

namespace {

// Strict JSON helpers: every object is checked against its allowed keys and
// every value against its expected type.

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError("unknown key '" + where + "." + key + "'");
  }
}

std::string key_path(const std::string& where, const char* key) { return where + "." + key; }

void read(const json& j, const std::string& where, const char* key, double& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(key_path(where, key) + " must be a number");
  out = v.get<double>();
}

void read(const json& j, const std::string& where, const char* key, int& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(key_path(where, key) + " must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(key_path(where, key) + " is out of range");
  }
  out = static_cast<int>(x);
}

void read(const json& j, const std::string& where, const char* key, std::uint64_t& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(key_path(where, key) + " must be a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

void read(const json& j, const std::string& where, const char* key, bool& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(key_path(where, key) + " must be true or false");
  out = v.get<bool>();
}

void read(const json& j, const std::string& where, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(key_path(where, key) + " must be a string");
  out = v.get<std::string>();
}

void read(const json& j, const std::string& where, const char* key, fs::path& out,
          const fs::path& base) {
  std::string s;
  read(j, where, key, s);
  if (s.empty()) return;
  const fs::path p(s);
  out = p.is_absolute() || base.empty() ? p : base / p;
}

void read(const json& j, const std::string& where, const char* key, ModelKind& out) {
  std::string s;
  read(j, where, key, s);
  if (s.empty()) return;
  const auto kind = model::parse_model_kind(s);
  if (!kind) throw ConfigError(key_path(where, key) + ": unknown model '" + s + "'");
  out = *kind;
}

void read(const json& j, const std::string& where, const char* key, std::vector<double>& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(key_path(where, key) + " must be an array of numbers");
  out.clear();
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(key_path(where, key) + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
}

void read(const json& j, const std::string& where, const char* key, std::vector<ModelKind>& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(key_path(where, key) + " must be an array of model names");
  out.clear();
  for (const auto& x : v) {
    const auto kind = x.is_string() ? model::parse_model_kind(x.get<std::string>()) : std::nullopt;
    if (!kind) throw ConfigError(key_path(where, key) + " holds an unknown model");
    out.push_back(*kind);
  }
}

void read_window(const json& j, windows::WindowConfig& w) {
  const std::string where = "window";
  check_keys(j, where, {"short_s", "long_face_s", "long_body_s", "success_fraction", "max_long_s",
                        "population_std"});
  read(j, where, "short_s", w.short_s);
  read(j, where, "long_face_s", w.long_face_s);
  read(j, where, "long_body_s", w.long_body_s);
  read(j, where, "success_fraction", w.success_fraction);
  read(j, where, "max_long_s", w.max_long_s);
  read(j, where, "population_std", w.population_std);
}

void read_train(const json& j, model::TrainConfig& t) {
  const std::string where = "train";
  check_keys(j, where, {"epochs", "class_weight_fussy", "learning_rate", "beta1", "beta2",
                        "epsilon", "batch_size", "hidden", "embedding", "features_per_group"});
  read(j, where, "epochs", t.epochs);
  read(j, where, "class_weight_fussy", t.class_weight_fussy);
  read(j, where, "learning_rate", t.learning_rate);
  read(j, where, "beta1", t.beta1);
  read(j, where, "beta2", t.beta2);
  read(j, where, "epsilon", t.epsilon);
  read(j, where, "batch_size", t.batch_size);
  read(j, where, "hidden", t.hidden);
  read(j, where, "embedding", t.embedding);
  read(j, where, "features_per_group", t.features_per_group);
}

void read_occlusion(const json& j, const std::string& where, synth::OcclusionConfig& o) {
  check_keys(j, where, {"rate_per_min", "mean_burst_s"});
  read(j, where, "rate_per_min", o.rate_per_min);
  read(j, where, "mean_burst_s", o.mean_burst_s);
}

void read_synth(const json& j, synth::SynthConfig& s) {
  const std::string where = "synth";
  check_keys(j, where, {"n_infants", "session_s", "dwell_alert_s", "dwell_fussy_s", "dwell_shape",
                        "transition_ramp_s", "crying_fraction", "effects", "face_occlusion",
                        "body_occlusion", "body_fps", "face_fps_min", "face_fps_max",
                        "face_noise_px", "body_noise_px", "au_noise"});
  read(j, where, "n_infants", s.n_infants);
  read(j, where, "session_s", s.session_s);
  read(j, where, "dwell_alert_s", s.dwell_alert_s);
  read(j, where, "dwell_fussy_s", s.dwell_fussy_s);
  read(j, where, "dwell_shape", s.dwell_shape);
  read(j, where, "transition_ramp_s", s.transition_ramp_s);
  read(j, where, "crying_fraction", s.crying_fraction);
  read(j, where, "body_fps", s.body_fps);
  read(j, where, "face_fps_min", s.face_fps_min);
  read(j, where, "face_fps_max", s.face_fps_max);
  read(j, where, "face_noise_px", s.face_noise_px);
  read(j, where, "body_noise_px", s.body_noise_px);
  read(j, where, "au_noise", s.au_noise);
  if (j.contains("effects")) {
    const auto& e = j.at("effects");
    const std::string ew = "synth.effects";
    check_keys(e, ew, {"face_distances", "face_aus", "body_distances", "body_speeds"});
    read(e, ew, "face_distances", s.effects.face_distances);
    read(e, ew, "face_aus", s.effects.face_aus);
    read(e, ew, "body_distances", s.effects.body_distances);
    read(e, ew, "body_speeds", s.effects.body_speeds);
  }
  if (j.contains("face_occlusion")) read_occlusion(j.at("face_occlusion"), "synth.face_occlusion", s.face_occlusion);
  if (j.contains("body_occlusion")) read_occlusion(j.at("body_occlusion"), "synth.body_occlusion", s.body_occlusion);
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

ingest::Dataset load(const RunConfig& config, std::ostream& log) {
  if (config.manifest.empty()) throw ConfigError("config needs 'manifest' for this command");
  auto dataset = ingest::load_dataset(ingest::read_manifest(config.manifest), config.binning);
  for (const auto& x : dataset.excluded) {
    log << "excluded " << x.entry.session_id << ": " << x.reason << '\n';
  }
  return dataset;
}

eval::CvOptions cv_options(const RunConfig& config) {
  eval::CvOptions o;
  o.k = config.folds;
  o.seed = config.seed;
  o.models = {config.model};
  o.window = config.window;
  o.train = config.train;
  o.jobs = config.jobs;
  return o;
}

std::vector<ModelKind> networks_for(ModelKind kind) {
  if (kind == ModelKind::Late) return {ModelKind::Face, ModelKind::Body};
  return {kind};
}

// Column ranges of `groups` inside a row laid out by extract_selected.
std::vector<std::pair<std::size_t, std::size_t>> ranges_for(const select::FeatureSelection& sel,
                                                            const std::vector<FeatureGroupId>& groups,
                                                            std::size_t& row_width) {
  std::array<std::size_t, 4> offset{};
  row_width = 0;
  for (std::size_t g = 0; g < 4; ++g) {
    offset[g] = row_width;
    row_width += sel.groups[g].chosen.size();
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (auto g : groups) out.push_back({offset[group_index(g)], sel[g].chosen.size()});
  return out;
}

void log_mean(std::ostream& log, const char* label, double v) {
  log << label << ' ' << text::g17(v) << '\n';
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  const std::string where = "config";
  check_keys(doc, where, {"seed", "out", "jobs", "model", "manifest", "folds",
                          "confidence_threshold", "window", "train", "synth", "sweep", "predict"});
  read(doc, where, "seed", c.seed);
  read(doc, where, "out", c.out_dir, base_dir);
  read(doc, where, "jobs", c.jobs);
  read(doc, where, "model", c.model);
  read(doc, where, "manifest", c.manifest, base_dir);
  read(doc, where, "folds", c.folds);
  read(doc, where, "confidence_threshold", c.binning.confidence_threshold);
  if (doc.contains("window")) read_window(doc.at("window"), c.window);
  if (doc.contains("train")) read_train(doc.at("train"), c.train);
  if (doc.contains("synth")) read_synth(doc.at("synth"), c.synth);
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    check_keys(s, "sweep", {"long_face_s", "long_body_s", "models"});
    read(s, "sweep", "long_face_s", c.sweep.long_face_s);
    read(s, "sweep", "long_body_s", c.sweep.long_body_s);
    read(s, "sweep", "models", c.sweep.models);
  }
  if (doc.contains("predict")) {
    const auto& p = doc.at("predict");
    check_keys(p, "predict", {"models", "session_id"});
    if (p.contains("models")) {
      const auto& m = p.at("models");
      if (!m.is_array()) throw ConfigError("predict.models must be an array of paths");
      for (const auto& x : m) {
        if (!x.is_string()) throw ConfigError("predict.models must be an array of paths");
        const fs::path q(x.get<std::string>());
        c.predict.model_paths.push_back(q.is_absolute() || base_dir.empty() ? q : base_dir / q);
      }
    }
    read(p, "predict", "session_id", c.predict.session_id);
  }
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (c.folds < 2) throw ConfigError("folds must be >= 2");
  if (!(c.binning.confidence_threshold >= 0.0 && c.binning.confidence_threshold <= 1.0)) {
    throw ConfigError("confidence_threshold must lie in [0,1]");
  }
  if (c.sweep.long_face_s.empty() || c.sweep.long_body_s.empty() || c.sweep.models.empty()) {
    throw ConfigError("sweep grids must be non-empty");
  }
  windows::validate(c.window);
  model::validate(c.train);
  synth::validate(c.synth);
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = text::read_file(path);
  } catch (const DiskError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, path.parent_path());
}

void apply(RunConfig& config, const Overrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.out_dir) config.out_dir = *o.out_dir;
  if (o.jobs) {
    if (*o.jobs < 1) throw ConfigError("--jobs must be >= 1");
    config.jobs = *o.jobs;
  }
}

std::vector<fs::path> model_files(const RunConfig& config, ModelKind kind) {
  std::vector<fs::path> out;
  for (auto k : networks_for(kind)) {
    out.push_back(config.out_dir / ("model_" + std::string(model::to_string(k)) + ".iafm"));
  }
  return out;
}

void cmd_synth(const RunConfig& config, std::ostream& log) {
  auto s = config.synth;
  s.seed = config.seed;
  const auto data = synth::generate_dataset(s, config.out_dir, config.jobs);
  std::size_t bins = 0;
  std::size_t alert = 0;
  for (const auto& t : data.truth) {
    bins += t.bin_states.size();
    alert += static_cast<std::size_t>(std::count(t.bin_states.begin(), t.bin_states.end(), AffectLabel::Alert));
  }
  log << "wrote " << data.manifest.entries.size() << " sessions to " << data.manifest_path.string()
      << " (" << bins << " bins, alert fraction "
      << text::g17(bins ? static_cast<double>(alert) / static_cast<double>(bins) : 0.0) << ")\n";
}

void cmd_ingest_check(const RunConfig& config, std::ostream& log) {
  const auto dataset = load(config, log);
  std::string out =
      "session_id,infant_id,bins,face_valid_fraction,body_valid_fraction,alert_fraction,"
      "fussy_fraction,samples,confident_samples,status\n";
  for (const auto& s : dataset.sessions) {
    const auto validity = windows::bin_validity(s);
    const double n = static_cast<double>(std::max<std::size_t>(s.bins.size(), 1));
    std::size_t face = 0, body = 0, alert = 0, fussy = 0;
    for (std::size_t i = 0; i < s.bins.size(); ++i) {
      face += validity.face[i];
      body += validity.body[i];
      alert += s.bins[i].label == AffectLabel::Alert;
      fussy += s.bins[i].label == AffectLabel::Fussy;
    }
    std::string status = "ok";
    std::size_t samples = 0, confident = 0;
    try {
      const auto idx = windows::index_samples(s, validity, config.window);
      samples = idx.size();
      for (std::size_t i = 0; i < idx.size(); ++i) confident += idx.confident(i);
    } catch (const SessionTooShort&) {
      status = "too_short";
    }
    out += s.session_id + ',' + s.infant_id + ',' + std::to_string(s.bins.size()) + ',';
    text::append_g17(out, static_cast<double>(face) / n);
    out += ',';
    text::append_g17(out, static_cast<double>(body) / n);
    out += ',';
    text::append_g17(out, static_cast<double>(alert) / n);
    out += ',';
    text::append_g17(out, static_cast<double>(fussy) / n);
    out += ',' + std::to_string(samples) + ',' + std::to_string(confident) + ',' + status + '\n';
  }
  for (const auto& x : dataset.excluded) {
    out += x.entry.session_id + ',' + x.entry.infant_id + ",0,,,,,0,0,excluded " + csv_safe(x.reason) + '\n';
  }
  text::write_file_atomic(config.out_dir / "ingest.csv", out);
  log << "checked " << dataset.sessions.size() << " sessions, " << dataset.excluded.size()
      << " excluded\n";
}

void cmd_sweep(const RunConfig& config, std::ostream& log) {
  const auto dataset = load(config, log);
  struct Cell {
    double face = 0.0;
    double body = 0.0;
    std::vector<double> auc_confident;
    std::vector<double> auc_total;
    std::string error;
  };
  std::vector<Cell> cells;
  for (double f : config.sweep.long_face_s) {
    for (double b : config.sweep.long_body_s) cells.push_back({f, b, {}, {}, {}});
  }
  parallel_for(cells.size(), config.jobs, [&](std::size_t i) {
    auto& cell = cells[i];
    try {
      auto opts = cv_options(config);
      opts.models = config.sweep.models;
      opts.window.long_face_s = cell.face;
      opts.window.long_body_s = cell.body;
      opts.jobs = 1;
      const auto result = eval::run_cv(dataset.sessions, opts);
      for (auto m : config.sweep.models) {
        cell.auc_confident.push_back(result.result(m).mean_auc_confident());
        cell.auc_total.push_back(result.result(m).mean_auc_total());
      }
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  std::string out = "model,long_face_s,long_body_s,auc_confident,auc_total,status,error\n";
  std::size_t failed = 0;
  for (std::size_t m = 0; m < config.sweep.models.size(); ++m) {
    for (const auto& cell : cells) {
      out += model::to_string(config.sweep.models[m]);
      out += ',';
      text::append_g17(out, cell.face);
      out += ',';
      text::append_g17(out, cell.body);
      out += ',';
      if (cell.error.empty()) {
        text::append_g17(out, cell.auc_confident[m]);
        out += ',';
        text::append_g17(out, cell.auc_total[m]);
        out += ",ok,\n";
      } else {
        out += ",,failed," + csv_safe(cell.error) + '\n';
      }
    }
  }
  for (const auto& cell : cells) failed += !cell.error.empty();
  text::write_file_atomic(config.out_dir / "sweep.csv", out);
  log << "swept " << cells.size() << " window pairs, " << failed << " failed\n";
}

void cmd_evaluate(const RunConfig& config, std::ostream& log) {
  const auto dataset = load(config, log);
  const auto result = eval::run_cv(dataset.sessions, cv_options(config));
  for (const auto& s : result.skipped) log << "skipped " << s.session_id << ": " << s.reason << '\n';
  const auto& mr = result.result(config.model);
  const auto labels = eval::session_labels(dataset.sessions);
  const std::pair<ModelKind, const eval::PredictionTrace*> traces[] = {{config.model, &mr.trace}};
  const std::pair<ModelKind, std::array<eval::TemporalCurve, 2>> tsat[] = {
      {config.model, eval::tsat_curve(mr.trace, labels)}};
  const std::pair<ModelKind, std::array<eval::TemporalCurve, 2>> tspt[] = {
      {config.model, eval::tspt_curve(mr.trace)}};
  eval::write_metrics_csv(config.out_dir / "metrics.csv", result.metrics);
  eval::write_trace_csv(config.out_dir / "trace.csv", traces);
  eval::write_curves_csv(config.out_dir / "tsat.csv", tsat);
  eval::write_curves_csv(config.out_dir / "tspt.csv", tspt);
  log << "model " << model::to_string(config.model) << '\n';
  log_mean(log, "mean AUC D_confident", mr.mean_auc_confident());
  log_mean(log, "mean AUC D_total", mr.mean_auc_total());
}

std::vector<model::GroupedModel> train_full(std::span<const Session> sessions, ModelKind kind,
                                            const RunConfig& config) {
  std::vector<eval::PreparedSession> prepared;
  std::array<select::ClassMoments, 4> merged;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    try {
      auto p = eval::prepare_session(sessions[s], config.window);
      p.session = s;
      for (std::size_t g = 0; g < 4; ++g) merged[g].merge(p.moments[g]);
      p.moments = {};
      prepared.push_back(std::move(p));
    } catch (const SessionTooShort&) {
    }
  }
  if (prepared.empty()) throw InsufficientData("no session is long enough to train on");
  const auto selection = select::select_from_moments(
      merged, static_cast<std::size_t>(config.train.features_per_group), -1);

  std::vector<ModelKind> nets = networks_for(kind);
  std::vector<model::TrainingMatrix> data(nets.size());
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> ranges(nets.size());
  std::size_t width = 0;
  for (std::size_t n = 0; n < nets.size(); ++n) {
    ranges[n] = ranges_for(selection, model::groups_for(nets[n]), width);
    for (const auto& [off, w] : ranges[n]) data[n].cols += w;
  }
  for (const auto& p : prepared) {
    const preprocess::FeatureColumns columns(sessions[p.session]);
    const auto rows = eval::extract_selected(columns, p.index, selection, config.window);
    for (std::size_t r = 0; r < p.index.size(); ++r) {
      if (!p.index.confident(r)) continue;
      for (std::size_t n = 0; n < nets.size(); ++n) {
        for (const auto& [off, w] : ranges[n]) {
          const double* src = rows.data() + r * width + off;
          data[n].values.insert(data[n].values.end(), src, src + w);
        }
        data[n].labels.push_back(p.index.labels[r]);
        ++data[n].rows;
      }
    }
  }
  std::vector<model::GroupedModel> out;
  for (std::size_t n = 0; n < nets.size(); ++n) {
    auto cfg = config.train;
    cfg.seed = derive_seed(config.seed, 0, static_cast<std::uint64_t>(nets[n]) + 1);
    out.push_back(model::train_selected(data[n], model::groups_for(nets[n]), selection, cfg));
  }
  return out;
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  const auto dataset = load(config, log);
  const auto models = train_full(dataset.sessions, config.model, config);
  const auto paths = model_files(config, config.model);
  for (std::size_t i = 0; i < models.size(); ++i) {
    model::save_model(models[i], paths[i]);
    log << "wrote " << paths[i].string() << '\n';
  }
}

eval::PredictionTrace predict_session(const Session& session,
                                      std::span<const model::GroupedModel> models,
                                      const RunConfig& config) {
  if (models.empty() || models.size() > 2) throw ConfigError("predict takes one or two models");
  const auto index =
      windows::index_samples(session, windows::bin_validity(session), config.window);
  const preprocess::FeatureColumns columns(session);
  std::vector<std::vector<double>> probs(models.size());
  for (std::size_t n = 0; n < models.size(); ++n) {
    const auto& net = models[n];
    select::FeatureSelection own;
    for (auto g : net.groups()) own[g] = net.selection[g];
    const auto rows = eval::extract_selected(columns, index, own, config.window);
    std::size_t width = 0;
    const auto ranges = ranges_for(own, net.groups(), width);
    std::vector<double> x;
    for (std::size_t r = 0; r < index.size(); ++r) {
      x.clear();
      for (const auto& [off, w] : ranges) {
        const double* src = rows.data() + r * width + off;
        x.insert(x.end(), src, src + w);
      }
      probs[n].push_back(model::predict(net, x).prob);
    }
  }
  eval::PredictionTrace trace;
  for (std::size_t r = 0; r < index.size(); ++r) {
    eval::TraceEntry e;
    e.infant_id = index.infant_id;
    e.session_id = index.session_id;
    e.end_bin = index.end_bins[r];
    e.truth = index.labels[r];
    e.prob = models.size() == 2 ? model::late_fuse(probs[0][r], probs[1][r]) : probs[0][r];
    e.predicted = eval::threshold_label(e.prob);
    e.confident = index.confident(r);
    trace.push_back(std::move(e));
  }
  return trace;
}

void cmd_predict(const RunConfig& config, std::ostream& log) {
  if (config.manifest.empty()) throw ConfigError("config needs 'manifest' for predict");
  const auto manifest = ingest::read_manifest(config.manifest);
  if (manifest.entries.empty()) throw ConfigError("manifest has no entries");
  const ingest::ManifestEntry* entry = &manifest.entries.front();
  if (!config.predict.session_id.empty()) {
    const auto it = std::find_if(manifest.entries.begin(), manifest.entries.end(), [&](const auto& e) {
      return e.session_id == config.predict.session_id;
    });
    if (it == manifest.entries.end()) {
      throw ConfigError("session '" + config.predict.session_id + "' is not in the manifest");
    }
    entry = &*it;
  }
  const auto paths =
      config.predict.model_paths.empty() ? model_files(config, config.model) : config.predict.model_paths;
  std::vector<model::GroupedModel> models;
  for (const auto& p : paths) models.push_back(model::load_model(p));
  const auto session = ingest::load_session(*entry, config.binning);
  const auto trace = predict_session(session, models, config);
  const ModelKind kind = models.size() == 2 ? ModelKind::Late : config.model;
  const std::pair<ModelKind, const eval::PredictionTrace*> traces[] = {{kind, &trace}};
  eval::write_trace_csv(config.out_dir / "trace.csv", traces);
  log << "scored " << trace.size() << " samples of " << session.session_id << '\n';
}

int run_command(std::string_view command, const RunConfig& config, std::ostream& log,
                std::ostream& err) {
  try {
    if (command == "synth") {
      cmd_synth(config, log);
    } else if (command == "ingest-check") {
      cmd_ingest_check(config, log);
    } else if (command == "sweep") {
      cmd_sweep(config, log);
    } else if (command == "evaluate") {
      cmd_evaluate(config, log);
    } else if (command == "train") {
      cmd_train(config, log);
    } else if (command == "predict") {
      cmd_predict(config, log);
    } else {
      throw ConfigError("unknown command '" + std::string(command) + "'");
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace iaffect::cli
