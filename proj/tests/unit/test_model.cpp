#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "iaffect/error.hpp"
#include "iaffect/model.hpp"

using namespace iaffect;
using namespace iaffect::model;

namespace {

select::FeatureSelection selection_of(const std::vector<std::pair<FeatureGroupId, std::size_t>>& widths) {
  select::FeatureSelection sel;
  for (auto [g, w] : widths) {
    sel[g].candidates = w * 3;
    for (std::size_t i = 0; i < w; ++i) sel[g].chosen.push_back({i * 2, 1.0 + static_cast<double>(i), 30.0, 0.01});
  }
  return sel;
}

/// Two Gaussian classes `shift` standard deviations apart on every column.
TrainingMatrix gaussian_classes(std::size_t rows, std::size_t cols, double shift, double fussy_rate,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution fussy(fussy_rate);
  TrainingMatrix m;
  m.rows = rows;
  m.cols = cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const bool f = fussy(rng);
    m.labels.push_back(f ? AffectLabel::Fussy : AffectLabel::Alert);
    for (std::size_t c = 0; c < cols; ++c) m.values.push_back(10.0 + 4.0 * (n(rng) + (f ? shift : 0.0)));
  }
  return m;
}

double rank_auc(const std::vector<double>& scores, const std::vector<AffectLabel>& labels) {
  std::vector<std::uint8_t> pos;
  for (auto l : labels) pos.push_back(l == AffectLabel::Fussy);
  return oracle::auc_pairs(scores, pos);
}

GroupedModel random_model(std::uint64_t seed) {
  GroupedModel m({FeatureGroupId::FaceAus, FeatureGroupId::BodySpeeds}, {3, 4}, 5, 6);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (auto& p : m.params()) p = u(rng);
  return m;
}

}  // namespace

TEST_CASE("model kinds and their groups") {
  CHECK(groups_for(ModelKind::Face) == std::vector{FeatureGroupId::FaceDistances, FeatureGroupId::FaceAus});
  CHECK(groups_for(ModelKind::Body) == std::vector{FeatureGroupId::BodyDistances, FeatureGroupId::BodySpeeds});
  CHECK(groups_for(ModelKind::Joint).size() == 4);
  CHECK(groups_for(ModelKind::Late).empty());
  for (auto k : {ModelKind::Face, ModelKind::Body, ModelKind::Joint, ModelKind::Late}) {
    CHECK(parse_model_kind(to_string(k)) == k);
  }
  CHECK_FALSE(parse_model_kind("audio"));
}

TEST_CASE("parameter layout") {
  GroupedModel m({FeatureGroupId::FaceAus, FeatureGroupId::BodySpeeds}, {3, 4}, 5, 6);
  CHECK(m.input_width() == 7);
  CHECK(m.input_offset(1) == 3);
  CHECK(m.branch_bias(0) == 15);
  CHECK(m.branch_weights(1) == 20);
  CHECK(m.fusion_weights() == 20 + 20 + 5);
  CHECK(m.fusion_bias() == 45 + 60);
  CHECK(m.output_weights() == 111);
  CHECK(m.output_bias() == 117);
  CHECK(m.parameter_count() == 118);
}

TEST_CASE("all-zero parameters give probability one half") {
  GroupedModel m({FeatureGroupId::FaceAus}, {4}, 3, 5);
  const std::vector<double> x = {1.0, -2.0, 3.0, 0.5};
  const auto r = forward(m, x);
  CHECK(r.prob == 0.5);
  CHECK(r.embedding == std::vector<double>(5, 0.0));
  CHECK_THROWS_AS(forward(m, std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("negative pre-activations clamp the embedding") {
  auto m = random_model(1);
  auto p = m.params();
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t j = 0; j < m.hidden(); ++j) p[m.branch_bias(g) + j] = -100.0;
  }
  for (std::size_t j = 0; j < m.embedding(); ++j) p[m.fusion_bias() + j] = -1.0;
  p[m.output_bias()] = 0.7;
  const std::vector<double> x = {0.1, -0.3, 0.2, 0.5, 0.0, -0.1, 0.4};
  const auto r = forward(m, x);
  CHECK(r.embedding == std::vector<double>(m.embedding(), 0.0));
  CHECK(r.prob == doctest::Approx(1.0 / (1.0 + std::exp(-0.7))).epsilon(1e-15));
}

TEST_CASE("weighted cross-entropy values") {
  CHECK(weighted_bce(0.5, AffectLabel::Alert) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(weighted_bce(0.5, AffectLabel::Fussy) == doctest::Approx(9.0 * std::log(2.0)).epsilon(1e-15));
  CHECK(weighted_bce(0.5, AffectLabel::Fussy, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(weighted_bce(0.0, AffectLabel::Alert) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(weighted_bce(1.0, AffectLabel::Fussy) < 1e-5);
  CHECK(std::isfinite(weighted_bce(0.0, AffectLabel::Fussy)));
  CHECK(weighted_bce(1e-3, AffectLabel::Alert) >= 0.0);
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = random_model(100 + seed);
    std::vector<double> x(m.input_width());
    for (auto& v : x) v = n(rng);
    for (auto label : {AffectLabel::Alert, AffectLabel::Fussy}) {
      std::vector<double> grad(m.parameter_count(), 0.0);
      const double loss = loss_and_gradient(m, x, label, 9.0, grad);
      CHECK(loss == doctest::Approx(weighted_bce(forward(m, x).prob, label)).epsilon(1e-14));
      const std::vector<double> base(m.params().begin(), m.params().end());
      const auto f = [&](const std::vector<double>& params) {
        GroupedModel copy = m;
        std::copy(params.begin(), params.end(), copy.params().begin());
        return weighted_bce(forward(copy, x).prob, label);
      };
      for (std::size_t i = 0; i < base.size(); ++i) {
        const double numeric = oracle::central_difference(f, base, i, 1e-5);
        const double scale = std::max(std::abs(numeric), std::abs(grad[i]));
        INFO("parameter " << i);
        if (scale < 1e-7) continue;
        CHECK(std::abs(numeric - grad[i]) / scale < 1e-4);
      }
    }
  }
}

TEST_CASE("initialisation is seeded and bounded by fan-in") {
  GroupedModel a({FeatureGroupId::FaceDistances}, {12}, 16, 32);
  GroupedModel b = a;
  initialize(a, 9);
  initialize(b, 9);
  CHECK(a == b);
  initialize(b, 10);
  CHECK_FALSE(a == b);
  const auto p = a.params();
  for (std::size_t i = 0; i < 12 * 16; ++i) CHECK(std::abs(p[i]) <= 1.0 / std::sqrt(12.0));
  for (std::size_t j = 0; j < 16; ++j) CHECK(p[a.branch_bias(0) + j] == 0.0);
  for (std::size_t i = 0; i < 16 * 32; ++i) CHECK(std::abs(p[a.fusion_weights() + i]) <= 0.25);
  CHECK(p[a.output_bias()] == 0.0);
}

TEST_CASE("zero epochs leave the seeded initialisation") {
  const auto data = gaussian_classes(100, 5, 1.0, 0.3, 4);
  const auto sel = selection_of({{FeatureGroupId::FaceAus, 2}, {FeatureGroupId::BodySpeeds, 3}});
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 77;
  const auto trained = train_selected(data, {FeatureGroupId::FaceAus, FeatureGroupId::BodySpeeds}, sel, cfg);
  GroupedModel fresh({FeatureGroupId::FaceAus, FeatureGroupId::BodySpeeds}, {2, 3}, 16, 32);
  initialize(fresh, 77);
  CHECK(std::equal(fresh.params().begin(), fresh.params().end(), trained.params().begin()));
}

TEST_CASE("training is deterministic for a seed") {
  const auto data = gaussian_classes(400, 6, 1.0, 0.2, 5);
  const auto sel = selection_of({{FeatureGroupId::FaceDistances, 6}});
  TrainConfig cfg;
  cfg.seed = 3;
  const auto a = train_selected(data, {FeatureGroupId::FaceDistances}, sel, cfg);
  const auto b = train_selected(data, {FeatureGroupId::FaceDistances}, sel, cfg);
  CHECK(a == b);
  cfg.seed = 4;
  const auto c = train_selected(data, {FeatureGroupId::FaceDistances}, sel, cfg);
  CHECK_FALSE(a == c);
}

TEST_CASE("standardisation uses the population std and guards constant columns") {
  auto data = gaussian_classes(300, 3, 1.0, 0.3, 6);
  for (std::size_t r = 0; r < data.rows; ++r) data.values[r * 3 + 2] = 5.0;
  const auto sel = selection_of({{FeatureGroupId::FaceAus, 3}});
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto m = train_selected(data, {FeatureGroupId::FaceAus}, sel, cfg);
  std::vector<double> col0;
  for (std::size_t r = 0; r < data.rows; ++r) col0.push_back(data.values[r * 3]);
  const auto [mean, sd] = oracle::mean_std(col0);
  CHECK(m.standardization[0].mean[0] == doctest::Approx(mean).epsilon(1e-13));
  CHECK(m.standardization[0].scale[0] == doctest::Approx(sd).epsilon(1e-12));
  CHECK(m.standardization[0].scale[2] == 1.0);
  const auto z = standardize(m, data.row(0));
  CHECK(z[2] == 0.0);
}

TEST_CASE("training requires both classes and matching widths") {
  auto data = gaussian_classes(50, 2, 1.0, 0.0, 7);
  const auto sel = selection_of({{FeatureGroupId::FaceAus, 2}});
  CHECK_THROWS_AS(train_selected(data, {FeatureGroupId::FaceAus}, sel, TrainConfig{}), SingleClassFold);
  data = gaussian_classes(50, 2, 1.0, 0.5, 7);
  const auto wide = selection_of({{FeatureGroupId::FaceAus, 3}});
  CHECK_THROWS_AS(train_selected(data, {FeatureGroupId::FaceAus}, wide, TrainConfig{}), DimensionMismatch);
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_selected(data, {FeatureGroupId::FaceAus}, sel, bad), ConfigError);
}

TEST_CASE("separable classes are learned") {
  const auto data = gaussian_classes(3000, 8, 3.0, 0.16, 8);
  const auto sel = selection_of({{FeatureGroupId::FaceAus, 4}, {FeatureGroupId::BodyDistances, 4}});
  TrainConfig cfg;
  cfg.seed = 11;
  const auto m = train_selected(data, {FeatureGroupId::FaceAus, FeatureGroupId::BodyDistances}, sel, cfg);
  std::vector<double> scores;
  for (std::size_t r = 0; r < data.rows; ++r) scores.push_back(predict(m, data.row(r)).prob);
  CHECK(rank_auc(scores, data.labels) >= 0.99);
}

TEST_CASE("permuted labels give chance-level held-out AUC") {
  const auto sel = selection_of({{FeatureGroupId::FaceAus, 4}, {FeatureGroupId::BodyDistances, 4}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto train_data = gaussian_classes(2000, 8, 3.0, 0.16, 1000 + seed);
    std::mt19937_64 rng(seed);
    std::shuffle(train_data.labels.begin(), train_data.labels.end(), rng);
    auto test_data = gaussian_classes(2000, 8, 3.0, 0.16, 2000 + seed);
    std::shuffle(test_data.labels.begin(), test_data.labels.end(), rng);
    TrainConfig cfg;
    cfg.seed = seed;
    const auto m = train_selected(train_data, {FeatureGroupId::FaceAus, FeatureGroupId::BodyDistances}, sel, cfg);
    std::vector<double> scores;
    for (std::size_t r = 0; r < test_data.rows; ++r) scores.push_back(predict(m, test_data.row(r)).prob);
    const double a = rank_auc(scores, test_data.labels);
    INFO("seed " << seed << " auc " << a);
    CHECK(a >= 0.40);
    CHECK(a <= 0.60);
  }
}

TEST_CASE("training from windowed samples selects then fits") {
  windows::WindowConfig wc;
  wc.long_face_s = 4.0;
  wc.long_body_s = 2.0;
  wc.max_long_s = 8.0;
  const auto samples = windows::build_samples(fixture::random_session(120, 12, 20), wc);
  TrainConfig cfg;
  cfg.features_per_group = 5;
  cfg.epochs = 2;
  const auto m = train(samples, groups_for(ModelKind::Body), cfg);
  CHECK(m.input_width() == 10);
  CHECK(m.selection[FeatureGroupId::BodySpeeds].chosen.size() == 5);
  const auto x = select_inputs(m, samples[7]);
  REQUIRE(x.size() == 10);
  CHECK(x[0] == samples[7][FeatureGroupId::BodyDistances][m.selection[FeatureGroupId::BodyDistances].chosen[0].index]);
  const double p = predict(m, x).prob;
  CHECK(p > 0.0);
  CHECK(p < 1.0);
}

TEST_CASE("late fusion averages probabilities") {
  CHECK(late_fuse(0.4, 0.6) == doctest::Approx(0.5));
  CHECK(late_fuse(0.2, 0.9) == doctest::Approx(0.55));
  for (double p : {0.01, 0.3, 0.77}) CHECK(late_fuse(p, p) == doctest::Approx(p).epsilon(1e-15));
}

TEST_CASE("saved models reload bit-identically") {
  fixture::TempDir dir("model_io");
  const auto data = gaussian_classes(300, 5, 1.0, 0.3, 13);
  const auto sel = selection_of({{FeatureGroupId::FaceAus, 2}, {FeatureGroupId::BodySpeeds, 3}});
  TrainConfig cfg;
  cfg.seed = 21;
  cfg.hidden = 4;
  cfg.embedding = 6;
  auto m = train_selected(data, {FeatureGroupId::FaceAus, FeatureGroupId::BodySpeeds}, sel, cfg);
  m.selection.fold_id = 2;
  const auto path = dir.path() / "m.iafm";
  save_model(m, path);
  const auto back = load_model(path);
  CHECK(back == m);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(10.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = n(rng);
    const auto a = predict(m, x);
    const auto b = predict(back, x);
    CHECK(a.prob == b.prob);
    CHECK(a.embedding == b.embedding);
  }
}

TEST_CASE("damaged or newer model files are rejected") {
  GroupedModel m({FeatureGroupId::FaceAus}, {2}, 3, 4);
  m.standardization = {{{0.0, 1.0}, {1.0, 2.0}}};
  m.selection = selection_of({{FeatureGroupId::FaceAus, 2}});
  initialize(m, 5);
  const std::string bytes = serialize_model(m);
  CHECK(deserialize_model(bytes) == m);

  for (std::size_t cut : {std::size_t{0}, std::size_t{7}, std::size_t{15}, bytes.size() / 2, bytes.size() - 1}) {
    CHECK_THROWS_AS(deserialize_model(bytes.substr(0, cut)), CorruptFile);
  }
  std::string flipped = bytes;
  flipped[30] ^= 0x10;
  CHECK_THROWS_AS(deserialize_model(flipped), CorruptFile);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_model(magic), CorruptFile);
  std::string newer = bytes;
  newer[8] = static_cast<char>(kModelFormatVersion + 1);
  CHECK_THROWS_AS(deserialize_model(newer), VersionMismatch);

  fixture::TempDir dir("model_trunc");
  const auto path = dir.path() / "t.iafm";
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
  }
  CHECK_THROWS_AS(load_model(path), CorruptFile);
}

TEST_CASE("collinear embeddings have one component") {
  std::vector<std::vector<double>> pts;
  for (int i = -5; i <= 5; ++i) pts.push_back({static_cast<double>(i), 2.0 * i});
  const auto r = pca_embed(pts);
  CHECK(r.components[0][0] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(r.components[0][1] == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(r.explained_variance[1] == 0.0);
  CHECK(r.degenerate);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(r.projected[i][0] == doctest::Approx(std::sqrt(5.0) * (static_cast<double>(i) - 5.0)).epsilon(1e-12));
  }
}

TEST_CASE("principal components are orthonormal") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> pts(500, std::vector<double>(6));
  for (auto& p : pts) for (auto& v : p) v = n(rng);
  const auto r = pca_embed(pts);
  double dot = 0.0, n0 = 0.0, n1 = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    dot += r.components[0][i] * r.components[1][i];
    n0 += r.components[0][i] * r.components[0][i];
    n1 += r.components[1][i] * r.components[1][i];
  }
  CHECK(std::abs(dot) < 1e-10);
  CHECK(n0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(n1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.explained_variance[0] >= r.explained_variance[1]);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("projections match a Jacobi eigendecomposition") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t d = 8;
  std::vector<std::vector<double>> pts(50, std::vector<double>(d));
  for (auto& p : pts) {
    for (std::size_t j = 0; j < d; ++j) p[j] = n(rng) * (1.0 + static_cast<double>(j));
  }
  std::vector<double> mean(d, 0.0);
  for (const auto& p : pts) for (std::size_t j = 0; j < d; ++j) mean[j] += p[j] / 50.0;
  std::vector<double> cov(d * d, 0.0);
  for (const auto& p : pts) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) cov[a * d + b] += (p[a] - mean[a]) * (p[b] - mean[b]) / 49.0;
    }
  }
  const auto [values, vectors] = oracle::jacobi_eigen(cov, d);
  const auto r = pca_embed(pts);
  for (int c = 0; c < 2; ++c) {
    CHECK(r.explained_variance[c] == doctest::Approx(values[c]).epsilon(1e-10));
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += r.components[c][j] * vectors[c][j];
    const double sign = dot < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double proj = 0.0;
      for (std::size_t j = 0; j < d; ++j) proj += (pts[i][j] - mean[j]) * vectors[c][j];
      CHECK(r.projected[i][c] == doctest::Approx(sign * proj).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("pca input checks") {
  std::vector<std::vector<double>> two = {{1, 2}, {3, 4}};
  CHECK_THROWS_AS(pca_embed(two), InsufficientData);
  std::vector<std::vector<double>> narrow = {{1}, {2}, {3}};
  CHECK_THROWS_AS(pca_embed(narrow), DimensionMismatch);
  std::vector<std::vector<double>> ragged = {{1, 2}, {2, 3}, {3}};
  CHECK_THROWS_AS(pca_embed(ragged), DimensionMismatch);
  std::vector<std::vector<double>> flat(5, std::vector<double>{1.0, 1.0});
  const auto r = pca_embed(flat);
  CHECK(r.degenerate);
  CHECK(r.explained_variance[0] == 0.0);
}
