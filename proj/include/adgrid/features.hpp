#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace adgrid {

/// One image signature: an identifier plus a d-dimensional feature vector.
struct FeatureVector {
  std::string id;
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
};

/// An ordered collection of feature vectors sharing one dimension.
/// The order carries meaning: for search results it is the original
/// relevance ranking.
struct FeatureSet {
  std::vector<FeatureVector> vectors;

  std::size_t size() const { return vectors.size(); }
  bool empty() const { return vectors.empty(); }
  std::size_t dim() const { return vectors.empty() ? 0 : vectors.front().dim(); }

  const FeatureVector& operator[](std::size_t i) const { return vectors[i]; }
  FeatureVector& operator[](std::size_t i) { return vectors[i]; }

  /// Throws if members disagree on dimension or ids repeat.
  void validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& v : vectors) {
      if (v.dim() != dim())
        throw std::invalid_argument("feature set members disagree on dimension");
      if (!seen.insert(v.id).second)
        throw std::invalid_argument("duplicate id in feature set: " + v.id);
    }
  }
};

inline double squared_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dimension mismatch in distance computation");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

inline double euclidean_distance(std::span<const float> a, std::span<const float> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const float> v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(acc);
}

/// Scales v to unit Euclidean norm. The zero vector has no direction, so it
/// is rejected rather than passed through.
inline FeatureVector l2_normalize(const FeatureVector& v) {
  const double n = norm(v.values);
  if (n == 0.0)
    throw std::invalid_argument("cannot normalize the zero vector (id: " + v.id + ")");
  FeatureVector out;
  out.id = v.id;
  out.values.resize(v.values.size());
  for (std::size_t i = 0; i < v.values.size(); ++i)
    out.values[i] = static_cast<float>(v.values[i] / n);
  return out;
}

}  // namespace adgrid
