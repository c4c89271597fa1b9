#include "scatterid/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scatterid {

namespace {

void require_same_length(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("vector lengths differ: " + std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()));
}

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kCosine:
      return "cosine";
    case Metric::kEuclidean:
      return "euclidean";
    case Metric::kChebyshev:
      return "chebyshev";
    case Metric::kManhattan:
      return "manhattan";
  }
  return "cosine";
}

Metric parse_metric(std::string_view text) {
  if (text == "cosine") return Metric::kCosine;
  if (text == "euclidean") return Metric::kEuclidean;
  if (text == "chebyshev") return Metric::kChebyshev;
  if (text == "manhattan") return Metric::kManhattan;
  throw std::invalid_argument("unknown metric '" + std::string(text) + "'");
}

std::string_view to_string(PeerReduction reduction) {
  return reduction == PeerReduction::kColumnMin ? "column_min" : "mean_nearest";
}

PeerReduction parse_peer_reduction(std::string_view text) {
  if (text == "column_min" || text == "min") return PeerReduction::kColumnMin;
  if (text == "mean_nearest" || text == "mean") return PeerReduction::kMeanNearest;
  throw std::invalid_argument("unknown peer reduction '" + std::string(text) + "'");
}

double cosine_distance(std::span<const double> p, std::span<const double> q) {
  require_same_length(p, q);
  double dot = 0.0;
  double pp = 0.0;
  double qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  if (!(pp > 0.0) || !(qq > 0.0)) throw ZeroNormError("cosine distance of a zero-norm vector");
  // sqrt(pp * qq) returns pp exactly when p == q, so self-distance is 0.
  const double prod = pp * qq;
  const double norm = std::isnormal(prod) ? std::sqrt(prod) : std::sqrt(pp) * std::sqrt(qq);
  const double cosine = dot / norm;
  return std::clamp(1.0 - cosine, 0.0, 2.0);
}

double alt_distance(Metric metric, std::span<const double> p, std::span<const double> q) {
  require_same_length(p, q);
  double acc = 0.0;
  switch (metric) {
    case Metric::kEuclidean:
      for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - q[i]) * (p[i] - q[i]);
      return std::sqrt(acc);
    case Metric::kChebyshev:
      for (std::size_t i = 0; i < p.size(); ++i) acc = std::max(acc, std::abs(p[i] - q[i]));
      return acc;
    case Metric::kManhattan:
      for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
      return acc;
    case Metric::kCosine:
      break;
  }
  throw std::invalid_argument("alt_distance does not handle the cosine metric");
}

double profile_distance(Metric metric, std::span<const double> p, std::span<const double> q) {
  return metric == Metric::kCosine ? cosine_distance(p, q) : alt_distance(metric, p, q);
}

DistanceTensor::DistanceTensor(std::vector<IdentityId> ids, std::size_t length)
    : ids_(std::move(ids)), length_(length), entries_(ids_.size() * ids_.size() * length, 0.0) {}

DistanceTensor distance_tensor(std::span<const SignalProfile> profiles, Metric metric) {
  if (profiles.size() < 2) throw std::invalid_argument("distance tensor needs N >= 2 profiles");
  const std::size_t length = profiles.front().length();
  const std::size_t tags =
      length == 0 ? 0 : profiles.front().signatures.front().reflections.size();
  std::vector<IdentityId> ids;
  for (const auto& p : profiles) {
    if (p.length() != length) throw std::invalid_argument("profiles differ in length L");
    for (const auto& sig : p.signatures) {
      if (sig.reflections.size() != tags)
        throw std::invalid_argument("profiles differ in tag count K");
    }
    ids.push_back(p.claimed_id);
  }

  if (metric == Metric::kCosine) {
    for (const auto& p : profiles) {
      for (std::size_t l = 0; l < length; ++l) {
        const auto& r = p.signatures[l].reflections;
        const bool zero = std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
        if (zero) {
          const int slot = l < p.slots.size() ? p.slots[l] : static_cast<int>(l);
          throw ZeroNormError("zero-norm signature for id " + std::to_string(p.claimed_id.value) +
                                  " at slot " + std::to_string(slot),
                              p.claimed_id, slot);
        }
      }
    }
  }

  DistanceTensor tensor(std::move(ids), length);
  for (std::size_t m = 0; m < profiles.size(); ++m) {
    for (std::size_t n = m + 1; n < profiles.size(); ++n) {
      for (std::size_t l = 0; l < length; ++l) {
        const double d = profile_distance(metric, profiles[m].signatures[l].reflections,
                                          profiles[n].signatures[l].reflections);
        tensor.at(m, n, l) = d;
        tensor.at(n, m, l) = d;
      }
    }
  }
  return tensor;
}

SimilarityVector similarity_vector(const DistanceTensor& tensor, std::size_t n) {
  return reduce_peers(tensor, n, PeerReduction::kColumnMin);
}

SimilarityVector reduce_peers(const DistanceTensor& tensor, std::size_t n,
                              PeerReduction reduction) {
  if (tensor.size() < 2)
    throw std::invalid_argument("similarity vector needs at least one other robot");
  if (n >= tensor.size()) throw std::out_of_range("robot index outside the tensor");
  SimilarityVector out;
  out.claimed_id = tensor.ids()[n];
  out.values.assign(tensor.length(), std::numeric_limits<double>::infinity());

  if (reduction == PeerReduction::kColumnMin) {
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      if (i == n) continue;
      for (std::size_t l = 0; l < tensor.length(); ++l)
        out.values[l] = std::min(out.values[l], tensor.at(i, n, l));
    }
    return out;
  }

  std::size_t best_peer = n;
  double best_mean = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    if (i == n) continue;
    double sum = 0.0;
    for (std::size_t l = 0; l < tensor.length(); ++l) sum += tensor.at(i, n, l);
    if (sum < best_mean) {
      best_mean = sum;
      best_peer = i;
    }
  }
  for (std::size_t l = 0; l < tensor.length(); ++l) out.values[l] = tensor.at(best_peer, n, l);
  return out;
}

}  // namespace scatterid
