#include "iaffect/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "iaffect/error.hpp"

namespace iaffect::model {

void validate(const TrainConfig& config) {
  if (config.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(config.class_weight_fussy > 0.0)) throw ConfigError("class_weight_fussy must be > 0");
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (config.hidden < 1 || config.embedding < 1) throw ConfigError("layer widths must be >= 1");
  if (config.features_per_group < 1) throw ConfigError("features_per_group must be >= 1");
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Face:
      return "face";
    case ModelKind::Body:
      return "body";
    case ModelKind::Joint:
      return "joint";
    case ModelKind::Late:
      return "late";
  }
  return "joint";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::Face, ModelKind::Body, ModelKind::Joint, ModelKind::Late}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::vector<FeatureGroupId> groups_for(ModelKind kind) {
  switch (kind) {
    case ModelKind::Face:
      return {FeatureGroupId::FaceDistances, FeatureGroupId::FaceAus};
    case ModelKind::Body:
      return {FeatureGroupId::BodyDistances, FeatureGroupId::BodySpeeds};
    case ModelKind::Joint:
      return {kAllGroups.begin(), kAllGroups.end()};
    case ModelKind::Late:
      return {};
  }
  return {};
}

GroupedModel::GroupedModel(std::vector<FeatureGroupId> groups,
                           std::vector<std::size_t> input_widths, std::size_t hidden,
                           std::size_t embedding)
    : groups_(std::move(groups)),
      widths_(std::move(input_widths)),
      hidden_(hidden),
      embedding_(embedding) {
  if (groups_.empty() || groups_.size() != widths_.size()) {
    throw DimensionMismatch("one input width per group required");
  }
  std::size_t offset = 0;
  for (std::size_t w : widths_) {
    branch_offsets_.push_back(offset);
    offset += w * hidden_ + hidden_;
  }
  fusion_offset_ = offset;
  offset += hidden_ * groups_.size() * embedding_ + embedding_;
  offset += embedding_ + 1;
  params_.assign(offset, 0.0);
  standardization.resize(groups_.size());
}

std::size_t GroupedModel::input_width() const {
  return std::accumulate(widths_.begin(), widths_.end(), std::size_t{0});
}

std::size_t GroupedModel::input_offset(std::size_t g) const {
  return std::accumulate(widths_.begin(), widths_.begin() + static_cast<std::ptrdiff_t>(g),
                         std::size_t{0});
}

bool operator==(const GroupedModel& a, const GroupedModel& b) {
  if (a.groups_ != b.groups_ || a.widths_ != b.widths_ || a.hidden_ != b.hidden_ ||
      a.embedding_ != b.embedding_ || !(a.selection == b.selection)) {
    return false;
  }
  if (a.standardization.size() != b.standardization.size()) return false;
  for (std::size_t g = 0; g < a.standardization.size(); ++g) {
    if (a.standardization[g].mean != b.standardization[g].mean ||
        a.standardization[g].scale != b.standardization[g].scale) {
      return false;
    }
  }
  const auto& ca = a.config;
  const auto& cb = b.config;
  if (ca.epochs != cb.epochs || ca.class_weight_fussy != cb.class_weight_fussy ||
      ca.learning_rate != cb.learning_rate || ca.beta1 != cb.beta1 || ca.beta2 != cb.beta2 ||
      ca.epsilon != cb.epsilon || ca.batch_size != cb.batch_size || ca.seed != cb.seed ||
      ca.hidden != cb.hidden || ca.embedding != cb.embedding ||
      ca.features_per_group != cb.features_per_group) {
    return false;
  }
  // Bitwise comparison so that signed zeros and NaN payloads count.
  return a.params_.size() == b.params_.size() &&
         std::equal(a.params_.begin(), a.params_.end(), b.params_.begin(),
                    [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; });
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Activations {
  std::vector<double> branch_pre;  // groups * hidden
  std::vector<double> concat;      // groups * hidden (post-ReLU)
  std::vector<double> fusion_pre;  // embedding
  std::vector<double> embedding;   // post-ReLU
  double logit = 0.0;
  double prob = 0.5;
};

void run_forward(const GroupedModel& m, std::span<const double> x, Activations& act) {
  if (x.size() != m.input_width()) {
    throw DimensionMismatch("model expects " + std::to_string(m.input_width()) + " inputs, got " +
                            std::to_string(x.size()));
  }
  const auto p = m.params();
  const std::size_t h = m.hidden();
  const std::size_t e = m.embedding();
  const std::size_t G = m.groups().size();
  act.branch_pre.assign(G * h, 0.0);
  act.concat.assign(G * h, 0.0);
  std::size_t in_off = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const std::size_t width = m.input_widths()[g];
    const double* W = p.data() + m.branch_weights(g);
    const double* b = p.data() + m.branch_bias(g);
    double* pre = act.branch_pre.data() + g * h;
    for (std::size_t j = 0; j < h; ++j) pre[j] = b[j];
    for (std::size_t i = 0; i < width; ++i) {
      const double xi = x[in_off + i];
      const double* row = W + i * h;
      for (std::size_t j = 0; j < h; ++j) pre[j] += xi * row[j];
    }
    for (std::size_t j = 0; j < h; ++j) act.concat[g * h + j] = std::max(0.0, pre[j]);
    in_off += width;
  }
  const double* Wf = p.data() + m.fusion_weights();
  const double* bf = p.data() + m.fusion_bias();
  act.fusion_pre.assign(bf, bf + e);
  for (std::size_t i = 0; i < G * h; ++i) {
    const double ci = act.concat[i];
    if (ci == 0.0) continue;
    const double* row = Wf + i * e;
    for (std::size_t j = 0; j < e; ++j) act.fusion_pre[j] += ci * row[j];
  }
  act.embedding.resize(e);
  const double* wo = p.data() + m.output_weights();
  double z = p[m.output_bias()];
  for (std::size_t j = 0; j < e; ++j) {
    act.embedding[j] = std::max(0.0, act.fusion_pre[j]);
    z += wo[j] * act.embedding[j];
  }
  act.logit = z;
  act.prob = sigmoid(z);
}

}  // namespace

ForwardResult forward(const GroupedModel& model, std::span<const double> standardized) {
  Activations act;
  run_forward(model, standardized, act);
  return {act.prob, act.logit, std::move(act.embedding)};
}

double weighted_bce(double prob, AffectLabel label, double class_weight_fussy) {
  const double p = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  if (label == AffectLabel::Fussy) return -class_weight_fussy * std::log(p);
  return -std::log1p(-p);
}

double loss_and_gradient(const GroupedModel& model, std::span<const double> x, AffectLabel label,
                         double class_weight_fussy, std::span<double> grad) {
  if (grad.size() != model.parameter_count()) throw DimensionMismatch("gradient buffer size");
  thread_local Activations act;
  run_forward(model, x, act);
  const double loss = weighted_bce(act.prob, label, class_weight_fussy);
  const bool fussy = label == AffectLabel::Fussy;
  const double w = fussy ? class_weight_fussy : 1.0;
  // d loss / d logit; zero where the probability clamp is active.
  const bool clamped = act.prob < kProbClamp || act.prob > 1.0 - kProbClamp;
  const double delta = clamped ? 0.0 : w * (act.prob - (fussy ? 1.0 : 0.0));
  if (delta == 0.0) return loss;

  const auto p = model.params();
  const std::size_t h = model.hidden();
  const std::size_t e = model.embedding();
  const std::size_t G = model.groups().size();

  double* g_wo = grad.data() + model.output_weights();
  const double* wo = p.data() + model.output_weights();
  grad[model.output_bias()] += delta;
  thread_local std::vector<double> d_fusion;
  d_fusion.assign(e, 0.0);
  for (std::size_t j = 0; j < e; ++j) {
    g_wo[j] += delta * act.embedding[j];
    d_fusion[j] = act.fusion_pre[j] > 0.0 ? delta * wo[j] : 0.0;
  }

  const double* Wf = p.data() + model.fusion_weights();
  double* g_Wf = grad.data() + model.fusion_weights();
  double* g_bf = grad.data() + model.fusion_bias();
  for (std::size_t j = 0; j < e; ++j) g_bf[j] += d_fusion[j];
  thread_local std::vector<double> d_concat;
  d_concat.assign(G * h, 0.0);
  for (std::size_t i = 0; i < G * h; ++i) {
    const double ci = act.concat[i];
    const double* row = Wf + i * e;
    double* g_row = g_Wf + i * e;
    double acc = 0.0;
    for (std::size_t j = 0; j < e; ++j) {
      g_row[j] += ci * d_fusion[j];
      acc += row[j] * d_fusion[j];
    }
    d_concat[i] = act.branch_pre[i] > 0.0 ? acc : 0.0;
  }

  std::size_t in_off = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const std::size_t width = model.input_widths()[g];
    double* g_W = grad.data() + model.branch_weights(g);
    double* g_b = grad.data() + model.branch_bias(g);
    const double* d = d_concat.data() + g * h;
    for (std::size_t j = 0; j < h; ++j) g_b[j] += d[j];
    for (std::size_t i = 0; i < width; ++i) {
      const double xi = x[in_off + i];
      double* g_row = g_W + i * h;
      for (std::size_t j = 0; j < h; ++j) g_row[j] += xi * d[j];
    }
    in_off += width;
  }
  return loss;
}

void initialize(GroupedModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto params = model.params();
  std::fill(params.begin(), params.end(), 0.0);
  const auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < count; ++i) params[offset + i] = dist(rng);
  };
  const std::size_t h = model.hidden();
  const std::size_t e = model.embedding();
  for (std::size_t g = 0; g < model.groups().size(); ++g) {
    const std::size_t width = model.input_widths()[g];
    fill(model.branch_weights(g), width * h, width);
  }
  const std::size_t concat = h * model.groups().size();
  fill(model.fusion_weights(), concat * e, concat);
  fill(model.output_weights(), e, e);
}

std::vector<double> standardize(const GroupedModel& model, std::span<const double> raw) {
  if (raw.size() != model.input_width()) throw DimensionMismatch("raw input width");
  std::vector<double> out(raw.size());
  std::size_t k = 0;
  for (const auto& s : model.standardization) {
    for (std::size_t i = 0; i < s.mean.size(); ++i, ++k) out[k] = (raw[k] - s.mean[i]) / s.scale[i];
  }
  return out;
}

ForwardResult predict(const GroupedModel& model, std::span<const double> raw) {
  const auto x = standardize(model, raw);
  return forward(model, x);
}

double late_fuse(double p_face, double p_body) { return 0.5 * (p_face + p_body); }

GroupedModel train_selected(const TrainingMatrix& data, std::vector<FeatureGroupId> groups,
                            const select::FeatureSelection& selection, const TrainConfig& config) {
  validate(config);
  std::size_t n_fussy = 0;
  std::size_t n_alert = 0;
  for (auto l : data.labels) {
    n_fussy += l == AffectLabel::Fussy;
    n_alert += l == AffectLabel::Alert;
  }
  if (n_fussy == 0 || n_alert == 0) {
    throw SingleClassFold("training data has " + std::to_string(n_alert) + " alert and " +
                          std::to_string(n_fussy) + " fussy samples");
  }
  std::vector<std::size_t> widths;
  for (auto g : groups) widths.push_back(selection[g].chosen.size());
  GroupedModel model(groups, widths, static_cast<std::size_t>(config.hidden),
                     static_cast<std::size_t>(config.embedding));
  if (data.cols != model.input_width()) throw DimensionMismatch("training matrix width");
  model.selection = selection;
  model.config = config;

  // Per-column z-score fitted on the training rows.
  const std::size_t n = data.rows;
  std::size_t col = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& s = model.standardization[g];
    s.mean.assign(widths[g], 0.0);
    s.scale.assign(widths[g], 1.0);
    for (std::size_t i = 0; i < widths[g]; ++i, ++col) {
      double sum = 0.0;
      for (std::size_t r = 0; r < n; ++r) sum += data.values[r * data.cols + col];
      const double mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = data.values[r * data.cols + col] - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n));
      s.mean[i] = mean;
      s.scale[i] = sd > 1e-12 ? sd : 1.0;
    }
  }
  std::vector<double> X(data.values.size());
  for (std::size_t r = 0; r < n; ++r) {
    const auto z = standardize(model, data.row(r));
    std::copy(z.begin(), z.end(), X.begin() + static_cast<std::ptrdiff_t>(r * data.cols));
  }

  initialize(model, config.seed);
  const std::size_t P = model.parameter_count();
  std::vector<double> grad(P), m1(P, 0.0), m2(P, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5DEECE66DULL);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::uint64_t step = 0;
  auto params = model.params();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t r = order[i];
        loss_and_gradient(model, {X.data() + r * data.cols, data.cols}, data.labels[r],
                          config.class_weight_fussy, grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < P; ++k) {
        const double g = grad[k] * inv;
        m1[k] = config.beta1 * m1[k] + (1.0 - config.beta1) * g;
        m2[k] = config.beta2 * m2[k] + (1.0 - config.beta2) * g * g;
        params[k] -= config.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + config.epsilon);
      }
    }
  }
  return model;
}

std::vector<double> select_inputs(const GroupedModel& model, const windows::WindowedSample& sample) {
  std::vector<double> raw;
  raw.reserve(model.input_width());
  for (auto g : model.groups()) {
    const auto& values = sample[g];
    for (const auto& stat : model.selection[g].chosen) raw.push_back(values.at(stat.index));
  }
  return raw;
}

GroupedModel train(std::span<const windows::WindowedSample> samples,
                   std::vector<FeatureGroupId> groups, const TrainConfig& config) {
  validate(config);
  const auto selection =
      select::select_top_k(samples, static_cast<std::size_t>(config.features_per_group));
  TrainingMatrix data;
  for (auto g : groups) data.cols += selection[g].chosen.size();
  for (const auto& s : samples) {
    if (s.label == AffectLabel::Excluded) continue;
    for (auto g : groups) {
      for (const auto& stat : selection[g].chosen) data.values.push_back(s[g].at(stat.index));
    }
    data.labels.push_back(s.label);
    ++data.rows;
  }
  return train_selected(data, std::move(groups), selection, config);
}

}  // namespace iaffect::model
