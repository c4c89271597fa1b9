#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scatterid/scene.hpp"
#include "scatterid/sigproc.hpp"

namespace scatterid {

enum class Metric { kCosine, kEuclidean, kChebyshev, kManhattan };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

/// Cosine distance of a zero vector is undefined.
class ZeroNormError : public std::domain_error {
 public:
  ZeroNormError(const std::string& what, IdentityId id = {-1}, int slot = -1)
      : std::domain_error(what), id_(id), slot_(slot) {}
  IdentityId id() const { return id_; }
  int slot() const { return slot_; }

 private:
  IdentityId id_;
  int slot_;
};

/// 1 - <p,q> / (|p| |q|). Throws ZeroNormError if either norm is zero.
double cosine_distance(std::span<const double> p, std::span<const double> q);

/// Euclidean, Chebyshev or Manhattan distance.
double alt_distance(Metric metric, std::span<const double> p, std::span<const double> q);

double profile_distance(Metric metric, std::span<const double> p, std::span<const double> q);

/// entries[m][n][l] = dist(row l of profile m, row l of profile n).
class DistanceTensor {
 public:
  DistanceTensor() = default;
  DistanceTensor(std::vector<IdentityId> ids, std::size_t length);

  std::size_t size() const { return ids_.size(); }
  std::size_t length() const { return length_; }
  const std::vector<IdentityId>& ids() const { return ids_; }

  double at(std::size_t m, std::size_t n, std::size_t l) const {
    return entries_[(m * ids_.size() + n) * length_ + l];
  }
  double& at(std::size_t m, std::size_t n, std::size_t l) {
    return entries_[(m * ids_.size() + n) * length_ + l];
  }
  const std::vector<double>& raw() const { return entries_; }

 private:
  std::vector<IdentityId> ids_;
  std::size_t length_ = 0;
  std::vector<double> entries_;
};

/// Requires N >= 2 profiles sharing L and K. A zero-norm row under the
/// cosine metric raises ZeroNormError naming the ID and slot.
DistanceTensor distance_tensor(std::span<const SignalProfile> profiles, Metric metric);

struct SimilarityVector {
  IdentityId claimed_id;
  std::vector<double> values;
};

/// values[l] = min over i != n of entries[i][n][l].
SimilarityVector similarity_vector(const DistanceTensor& tensor, std::size_t n);

/// How a robot's distances to its peers collapse into one L-vector.
enum class PeerReduction {
  kColumnMin,     // per-slot minimum over peers
  kMeanNearest,   // ablation: single peer with the smallest window-mean distance
};

std::string_view to_string(PeerReduction reduction);
PeerReduction parse_peer_reduction(std::string_view text);

SimilarityVector reduce_peers(const DistanceTensor& tensor, std::size_t n,
                              PeerReduction reduction);

}  // namespace scatterid
