#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace scatterid {

/// Known on/off reflection pattern the tags transmit, one block of
/// bits_per_tag bits per tag, tags in turn. Each bit is held for
/// samples_per_bit samples.
struct BitTemplate {
  std::vector<std::uint8_t> bits;  // num_tags * bits_per_tag entries
  std::size_t num_tags = 0;
  std::size_t bits_per_tag = 0;
  std::size_t samples_per_bit = 0;

  /// Fixed pseudorandom pattern shared by every participant. Each tag's
  /// block starts with a reflecting bit and ends with an absorbing one so
  /// blocks never merge into a single run across a tag boundary.
  static BitTemplate standard(std::size_t num_tags, std::size_t bits_per_tag,
                              std::size_t samples_per_bit);

  /// Throws std::invalid_argument when a tag block is all-zero or all-one or
  /// the sizes disagree.
  void validate() const;

  std::size_t tag_sample_length() const { return bits_per_tag * samples_per_bit; }
  std::size_t sample_length() const { return num_tags * tag_sample_length(); }

  bool bit(std::size_t tag, std::size_t index) const {
    return bits[tag * bits_per_tag + index] != 0;
  }
  /// Template value i(t) at sample offset t within the backscatter region.
  bool reflecting_at(std::size_t sample) const {
    return bits[sample / samples_per_bit] != 0;
  }

  /// Maximal runs of reflecting samples, as half-open [begin, end) sample
  /// offsets within the region.
  struct Run {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Run> reflecting_runs() const;
};

}  // namespace scatterid
