#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "adgrid/features.hpp"
#include "adgrid/random.hpp"

namespace adgrid {

/// A flat k x dim centroid table.
struct KMeansCodebook {
  int k = 0;
  int dim = 0;
  std::vector<float> centroids;  // k x dim, row major

  std::span<const float> centroid(int i) const {
    return {centroids.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
};

/// Index of the nearest centroid under squared Euclidean distance,
/// ties broken by lowest index.
inline int nearest_centroid(const KMeansCodebook& book, std::span<const float> v) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < book.k; ++i) {
    const double d = squared_distance(book.centroid(i), v);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

/**
 * Lloyd's algorithm with k-means++ seeding. Runs until the assignment
 * reaches a fixpoint or max_iters passes. Empty clusters are re-seeded from
 * the point farthest from its current centroid. Fully deterministic for a
 * given seed: all sampling uses raw mt19937 draws.
 */
inline KMeansCodebook fit_kmeans(std::span<const float> data, std::size_t n, std::size_t dim,
                                 int k, int max_iters, std::uint32_t seed) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (n < static_cast<std::size_t>(k))
    throw std::invalid_argument("fewer points than clusters");

  auto point = [&](std::size_t i) -> std::span<const float> {
    return data.subspan(i * dim, dim);
  };

  KMeansCodebook book;
  book.k = k;
  book.dim = static_cast<int>(dim);
  book.centroids.resize(static_cast<std::size_t>(k) * dim);
  auto centroid_mut = [&](int c) { return book.centroids.data() + static_cast<std::size_t>(c) * dim; };

  // k-means++ seeding
  std::mt19937 gen(seed);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = rng::uniform_index(gen, n);
    std::copy_n(point(first).data(), dim, centroid_mut(0));
    for (std::size_t i = 0; i < n; ++i) min_dist[i] = squared_distance(point(i), book.centroid(0));
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (double d : min_dist) total += d;
      std::size_t pick = 0;
      if (total > 0.0) {
        const double r = rng::uniform_unit(gen) * total;
        double acc = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += min_dist[i];
          if (acc > r) {
            pick = i;
            break;
          }
        }
      }
      std::copy_n(point(pick).data(), dim, centroid_mut(c));
      for (std::size_t i = 0; i < n; ++i) {
        const double d = squared_distance(point(i), book.centroid(c));
        if (d < min_dist[i]) min_dist[i] = d;
      }
    }
  }

  std::vector<int> assign(n, -1);
  std::vector<int> prev(n, -2);
  std::vector<double> sums(static_cast<std::size_t>(k) * dim);
  std::vector<std::size_t> counts(k);

  for (int iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_centroid(book, point(i));
    if (assign == prev) break;
    prev = assign;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = point(i);
      double* s = sums.data() + static_cast<std::size_t>(assign[i]) * dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      float* dst = centroid_mut(c);
      const double* s = sums.data() + static_cast<std::size_t>(c) * dim;
      for (std::size_t j = 0; j < dim; ++j)
        dst[j] = static_cast<float>(s[j] / static_cast<double>(counts[c]));
    }

    // Re-seed each empty cluster from the point farthest from its centroid.
    for (int c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assign[i]] <= 1) continue;  // do not orphan another cluster
        const double d = squared_distance(point(i), book.centroid(assign[i]));
        if (d > far_dist) {
          far_dist = d;
          far = i;
        }
      }
      if (far_dist < 0.0) continue;  // every cluster is a singleton already
      std::copy_n(point(far).data(), dim, centroid_mut(c));
      --counts[assign[far]];
      assign[far] = c;
      counts[c] = 1;
    }
  }
  return book;
}

inline KMeansCodebook fit_kmeans(const std::vector<std::vector<float>>& data, int k,
                                 int max_iters, std::uint32_t seed) {
  if (data.empty()) throw std::invalid_argument("fewer points than clusters");
  const std::size_t dim = data.front().size();
  std::vector<float> flat;
  flat.reserve(data.size() * dim);
  for (const auto& v : data) {
    if (v.size() != dim) throw std::invalid_argument("ragged k-means input");
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return fit_kmeans(flat, data.size(), dim, k, max_iters, seed);
}

}  // namespace adgrid
