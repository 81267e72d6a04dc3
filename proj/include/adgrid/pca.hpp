#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "adgrid/features.hpp"

namespace adgrid {

/// Linear dimensionality reduction learned from a sample corpus.
/// `basis` is row-major (output_dim x input_dim); rows are orthonormal
/// eigenvectors of the sample covariance, ordered by descending eigenvalue.
struct PcaModel {
  int input_dim = 0;
  int output_dim = 0;
  std::vector<float> mean;       // input_dim
  std::vector<float> basis;      // output_dim x input_dim, row major
  std::vector<float> variances;  // output_dim, descending

  std::span<const float> row(int r) const {
    return {basis.data() + static_cast<std::size_t>(r) * input_dim,
            static_cast<std::size_t>(input_dim)};
  }
};

/// A dimension permutation that balances per-bucket variance, so that the
/// M subvector slices seen by the quantizer carry comparable energy.
/// Position j of the permuted vector takes source dimension perm[j];
/// bucket b owns the contiguous positions [b*d/M, (b+1)*d/M).
struct PermutationPlan {
  std::vector<int> perm;
  int num_subvectors = 0;
  std::vector<float> bucket_variance;
};

/**
 * Fits PCA on the sample covariance (1/N convention). Eigenvector signs are
 * normalized so the largest-magnitude component of each row is positive,
 * which keeps serialized models reproducible.
 */
inline PcaModel fit_pca(const FeatureSet& data, int output_dim) {
  const int n = static_cast<int>(data.size());
  const int d = static_cast<int>(data.dim());
  if (output_dim <= 0 || output_dim > d)
    throw std::invalid_argument("output_dim must be in [1, input_dim]");
  if (n < output_dim)
    throw std::invalid_argument("need at least output_dim samples to fit PCA");

  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(data[i].dim()) != d)
      throw std::invalid_argument("ragged feature set");
    for (int j = 0; j < d; ++j) x(i, j) = data[i].values[j];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  // Eigen returns eigenvalues ascending; take the top output_dim in reverse.
  const auto& evals = solver.eigenvalues();
  const auto& evecs = solver.eigenvectors();

  PcaModel model;
  model.input_dim = d;
  model.output_dim = output_dim;
  model.mean.resize(d);
  for (int j = 0; j < d; ++j) model.mean[j] = static_cast<float>(mean(j));
  model.basis.resize(static_cast<std::size_t>(output_dim) * d);
  model.variances.resize(output_dim);
  for (int r = 0; r < output_dim; ++r) {
    const int src = d - 1 - r;
    Eigen::VectorXd v = evecs.col(src);
    int arg = 0;
    for (int j = 1; j < d; ++j)
      if (std::abs(v(j)) > std::abs(v(arg))) arg = j;
    if (v(arg) < 0) v = -v;
    for (int j = 0; j < d; ++j)
      model.basis[static_cast<std::size_t>(r) * d + j] = static_cast<float>(v(j));
    model.variances[r] = static_cast<float>(std::max(0.0, evals(src)));
  }
  return model;
}

/**
 * Greedy longest-processing-time balancing: dimensions sorted by variance
 * descending, each assigned to the not-yet-full bucket with the smallest
 * variance sum. Ties go to the lowest index.
 */
inline PermutationPlan fit_permutation(std::span<const float> variances, int num_subvectors) {
  const int d = static_cast<int>(variances.size());
  if (num_subvectors <= 0 || d % num_subvectors != 0)
    throw std::invalid_argument("dimension must be divisible by the subvector count");
  const int per_bucket = d / num_subvectors;

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return variances[a] > variances[b]; });

  std::vector<std::vector<int>> buckets(num_subvectors);
  std::vector<double> sums(num_subvectors, 0.0);
  for (int dim : order) {
    int best = -1;
    for (int b = 0; b < num_subvectors; ++b) {
      if (static_cast<int>(buckets[b].size()) == per_bucket) continue;
      if (best < 0 || sums[b] < sums[best]) best = b;
    }
    buckets[best].push_back(dim);
    sums[best] += variances[dim];
  }

  PermutationPlan plan;
  plan.num_subvectors = num_subvectors;
  plan.perm.reserve(d);
  for (int b = 0; b < num_subvectors; ++b) {
    plan.perm.insert(plan.perm.end(), buckets[b].begin(), buckets[b].end());
    plan.bucket_variance.push_back(static_cast<float>(sums[b]));
  }
  return plan;
}

/// center -> rotate -> permute -> L2 normalize.
/// Errors if the input projects to the zero vector (e.g. v equals the mean).
inline FeatureVector project(const FeatureVector& v, const PcaModel& pca,
                             const PermutationPlan& plan) {
  if (static_cast<int>(v.dim()) != pca.input_dim)
    throw std::invalid_argument("projection input dimension mismatch");
  if (static_cast<int>(plan.perm.size()) != pca.output_dim)
    throw std::invalid_argument("permutation plan does not match PCA output dimension");

  std::vector<double> rotated(pca.output_dim, 0.0);
  for (int r = 0; r < pca.output_dim; ++r) {
    const auto row = pca.row(r);
    double acc = 0.0;
    for (int j = 0; j < pca.input_dim; ++j)
      acc += static_cast<double>(row[j]) *
             (static_cast<double>(v.values[j]) - static_cast<double>(pca.mean[j]));
    rotated[r] = acc;
  }

  FeatureVector out;
  out.id = v.id;
  out.values.resize(pca.output_dim);
  for (int j = 0; j < pca.output_dim; ++j)
    out.values[j] = static_cast<float>(rotated[plan.perm[j]]);
  return l2_normalize(out);
}

inline FeatureSet project(const FeatureSet& set, const PcaModel& pca,
                          const PermutationPlan& plan) {
  FeatureSet out;
  out.vectors.reserve(set.size());
  for (const auto& v : set.vectors) out.vectors.push_back(project(v, pca, plan));
  return out;
}

/// Pass-through model: zero mean, identity basis, unit variances.
inline PcaModel identity_pca(int dim) {
  PcaModel model;
  model.input_dim = dim;
  model.output_dim = dim;
  model.mean.assign(dim, 0.0f);
  model.basis.assign(static_cast<std::size_t>(dim) * dim, 0.0f);
  for (int i = 0; i < dim; ++i) model.basis[static_cast<std::size_t>(i) * dim + i] = 1.0f;
  model.variances.assign(dim, 1.0f);
  return model;
}

inline PermutationPlan identity_plan(int dim, int num_subvectors) {
  if (num_subvectors <= 0 || dim % num_subvectors != 0)
    throw std::invalid_argument("dimension must be divisible by the subvector count");
  PermutationPlan plan;
  plan.num_subvectors = num_subvectors;
  plan.perm.resize(dim);
  std::iota(plan.perm.begin(), plan.perm.end(), 0);
  plan.bucket_variance.assign(num_subvectors, static_cast<float>(dim / num_subvectors));
  return plan;
}

}  // namespace adgrid
