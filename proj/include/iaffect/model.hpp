#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "iaffect/preprocess.hpp"
#include "iaffect/select.hpp"
#include "iaffect/windows.hpp"

namespace iaffect::model {

struct TrainConfig {
  int epochs = 5;
  double class_weight_fussy = 9.0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  std::uint64_t seed = 0;
  int hidden = 16;     // branch width h
  int embedding = 32;  // fusion width e
  int features_per_group = 12;
};

void validate(const TrainConfig& config);

enum class ModelKind : std::uint8_t { Face, Body, Joint, Late };
std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);
/// Feature groups consumed by a single network. Late fusion has none of its
/// own; it combines a Face and a Body network.
std::vector<FeatureGroupId> groups_for(ModelKind kind);

struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;  // population std; 1 where the column is constant
};

/// Grouped-branch network: per-group ReLU dense branch, concatenation,
/// ReLU fusion layer (the embedding), sigmoid output. All parameters live in
/// one flat vector; the offset helpers give each tensor's position.
/// Branch weights are (input x hidden) row-major, fusion weights
/// (hidden*groups x embedding) row-major.
class GroupedModel {
 public:
  GroupedModel() = default;
  GroupedModel(std::vector<FeatureGroupId> groups, std::vector<std::size_t> input_widths,
               std::size_t hidden, std::size_t embedding);

  const std::vector<FeatureGroupId>& groups() const { return groups_; }
  const std::vector<std::size_t>& input_widths() const { return widths_; }
  std::size_t input_width() const;
  std::size_t input_offset(std::size_t g) const;
  std::size_t hidden() const { return hidden_; }
  std::size_t embedding() const { return embedding_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::size_t branch_weights(std::size_t g) const { return branch_offsets_[g]; }
  std::size_t branch_bias(std::size_t g) const { return branch_offsets_[g] + widths_[g] * hidden_; }
  std::size_t fusion_weights() const { return fusion_offset_; }
  std::size_t fusion_bias() const { return fusion_offset_ + hidden_ * groups_.size() * embedding_; }
  std::size_t output_weights() const { return fusion_bias() + embedding_; }
  std::size_t output_bias() const { return output_weights() + embedding_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  select::FeatureSelection selection;
  std::vector<Standardization> standardization;  // one per model group
  TrainConfig config;

  friend bool operator==(const GroupedModel&, const GroupedModel&);

 private:
  std::vector<FeatureGroupId> groups_;
  std::vector<std::size_t> widths_;
  std::size_t hidden_ = 0;
  std::size_t embedding_ = 0;
  std::vector<std::size_t> branch_offsets_;
  std::size_t fusion_offset_ = 0;
  std::vector<double> params_;
};

struct ForwardResult {
  double prob = 0.5;
  double logit = 0.0;
  std::vector<double> embedding;
};

/// Forward pass on already-standardised inputs (group inputs concatenated in
/// model group order). Throws DimensionMismatch.
ForwardResult forward(const GroupedModel& model, std::span<const double> standardized);

inline constexpr double kProbClamp = 1e-7;

/// -w [y log p + (1-y) log(1-p)], with y = 1 and w = class_weight_fussy for
/// Fussy, y = 0 and w = 1 for Alert. p is clamped to [1e-7, 1-1e-7].
double weighted_bce(double prob, AffectLabel label, double class_weight_fussy = 9.0);

/// Loss of one sample and its gradient with respect to every parameter,
/// added into `grad` (same layout as params()).
double loss_and_gradient(const GroupedModel& model, std::span<const double> standardized,
                         AffectLabel label, double class_weight_fussy, std::span<double> grad);

/// Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
void initialize(GroupedModel& model, std::uint64_t seed);

/// Raw selected inputs for model training, row-major (rows x input width).
struct TrainingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<AffectLabel> labels;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

/// Fits standardisation, initialises, and runs mini-batch Adam on
/// pre-selected inputs. Throws SingleClassFold.
GroupedModel train_selected(const TrainingMatrix& data, std::vector<FeatureGroupId> groups,
                            const select::FeatureSelection& selection, const TrainConfig& config);

/// Full fit on a training fold: feature selection, standardisation and
/// training.
GroupedModel train(std::span<const windows::WindowedSample> samples,
                   std::vector<FeatureGroupId> groups, const TrainConfig& config);

/// Pulls the model's selected aggregates out of a materialised sample.
std::vector<double> select_inputs(const GroupedModel& model, const windows::WindowedSample& sample);

std::vector<double> standardize(const GroupedModel& model, std::span<const double> raw);
/// Standardises then runs forward().
ForwardResult predict(const GroupedModel& model, std::span<const double> raw);

double late_fuse(double p_face, double p_body);

struct PcaResult {
  std::array<std::vector<double>, 2> components;
  std::vector<std::array<double, 2>> projected;
  std::array<double, 2> explained_variance{};
  /// Covariance rank below 2; the second component is zero-filled.
  bool degenerate = false;
};

/// Two leading principal components of a set of embeddings (covariance with
/// n-1 divisor). Each component's largest-magnitude entry is positive.
PcaResult pca_embed(std::span<const std::vector<double>> embeddings);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const GroupedModel& model, const std::filesystem::path& path);
GroupedModel load_model(const std::filesystem::path& path);
std::string serialize_model(const GroupedModel& model);
GroupedModel deserialize_model(std::string_view bytes);

}  // namespace iaffect::model
