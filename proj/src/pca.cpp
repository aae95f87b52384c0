#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "iaffect/error.hpp"
#include "iaffect/model.hpp"

namespace iaffect::model {

PcaResult pca_embed(std::span<const std::vector<double>> embeddings) {
  if (embeddings.size() < 3) throw InsufficientData("PCA needs at least 3 embeddings");
  const auto n = static_cast<Eigen::Index>(embeddings.size());
  const auto d = static_cast<Eigen::Index>(embeddings.front().size());
  if (d < 2) throw DimensionMismatch("PCA needs embeddings of width >= 2");

  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = embeddings[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(e.size()) != d) throw DimensionMismatch("ragged embeddings");
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = e[static_cast<std::size_t>(j)];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw InsufficientData("eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const double top = std::max(values(d - 1), 0.0);
  const double tol = std::max(top, 1.0) * static_cast<double>(d) * 1e-12;

  PcaResult out;
  for (int c = 0; c < 2; ++c) {
    const Eigen::Index col = d - 1 - c;
    const double lambda = values(col);
    out.components[c].assign(static_cast<std::size_t>(d), 0.0);
    if (!(lambda > tol)) {
      out.degenerate = true;
      out.explained_variance[c] = 0.0;
      continue;
    }
    Eigen::VectorXd v = vectors.col(col).normalized();
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    for (Eigen::Index j = 0; j < d; ++j) out.components[c][static_cast<std::size_t>(j)] = v(j);
    out.explained_variance[c] = lambda;
  }
  out.projected.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) acc += x(i, j) * out.components[c][static_cast<std::size_t>(j)];
      out.projected[static_cast<std::size_t>(i)][c] = acc;
    }
  }
  return out;
}

}  // namespace iaffect::model
