#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scatterid/bit_template.hpp"
#include "scatterid/scene.hpp"

namespace scatterid {

/// output[n] = mean(samples[n .. n+window-1]); length N - window + 1.
std::vector<double> moving_average(std::span<const double> samples, std::size_t window);

/// Default smoothing window: samples_per_bit / 5, bumped to the next odd
/// value so the smoothed correlation peak is unique.
std::size_t default_smoothing_window(std::size_t samples_per_bit);

/// c(n) = sum_t s(n+t) * i(t) for every n with the template fully inside s.
std::vector<double> template_correlation(std::span<const double> signal,
                                         const BitTemplate& bit_template);

struct BackscatterWindow {
  std::size_t t_start = 0;  // index into the smoothed signal
  std::size_t t_end = 0;    // t_start + T
};

/// argmax of the template correlation over the smoothed signal, smallest
/// index on ties.
BackscatterWindow locate_backscatter(std::span<const double> smoothed,
                                     const BitTemplate& bit_template);

struct BackscatterSegment {
  BackscatterWindow window;
  /// Backscatter onset in raw-sample coordinates. On noiseless traces this is
  /// window.t_start + (smoothing_window - 1) / 2.
  std::size_t onset = 0;
  std::vector<std::vector<double>> tag_segments;  // K sub-segments of raw samples
};

/// Smooths the raw trace, locates the template in the smoothed signal, then
/// refines the onset on the raw samples within one smoothing window and
/// splits the raw backscatter region into per-tag sub-segments.
BackscatterSegment segment_backscatter(std::span<const double> raw,
                                       const BitTemplate& bit_template,
                                       std::size_t smoothing_window);

struct MultipathSignature {
  std::vector<double> reflections;  // p_1 .. p_K
};

/// p_i = mean(reflecting samples of tag i) - mean(absorbing samples of tag i).
MultipathSignature extract_signature(const std::vector<std::vector<double>>& tag_segments,
                                     const BitTemplate& bit_template);

struct SignatureRecord {
  int slot = 0;
  IdentityId claimed_id;
  MultipathSignature signature;
};

struct SignalProfile {
  IdentityId claimed_id;
  int window = 0;
  std::vector<int> slots;                       // strictly increasing
  std::vector<MultipathSignature> signatures;   // L rows, one per slot
  std::size_t length() const { return signatures.size(); }
};

struct DiscardedWindow {
  IdentityId claimed_id;
  int window = 0;
};

struct ProfileSet {
  std::vector<SignalProfile> profiles;  // ordered by (window, claimed_id)
  std::vector<DiscardedWindow> discarded;
};

/// Groups a signature stream into tumbling windows of `length` slots per ID.
/// Trailing partial windows are dropped; an ID missing a slot inside a
/// window loses that window.
ProfileSet build_profiles(std::span<const SignatureRecord> records, std::size_t length);

}  // namespace scatterid
