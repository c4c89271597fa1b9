#include "scatterid/sigproc.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace scatterid {

BitTemplate BitTemplate::standard(std::size_t num_tags, std::size_t bits_per_tag,
                                  std::size_t samples_per_bit) {
  BitTemplate tmpl;
  tmpl.num_tags = num_tags;
  tmpl.bits_per_tag = bits_per_tag;
  tmpl.samples_per_bit = samples_per_bit;
  tmpl.bits.reserve(num_tags * bits_per_tag);
  // Pattern is part of the protocol, not the scenario: fixed seed.
  Rng rng(0x5ca77e21dULL);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t k = 0; k < num_tags; ++k) {
    for (std::size_t b = 0; b < bits_per_tag; ++b) {
      std::uint8_t bit = coin(rng) ? 1 : 0;
      if (b == 0) bit = 1;
      if (b + 1 == bits_per_tag) bit = 0;
      tmpl.bits.push_back(bit);
    }
  }
  tmpl.validate();
  return tmpl;
}

void BitTemplate::validate() const {
  if (num_tags == 0 || bits_per_tag == 0 || samples_per_bit == 0)
    throw std::invalid_argument("bit template dimensions must be positive");
  if (bits.size() != num_tags * bits_per_tag)
    throw std::invalid_argument("bit template length does not match num_tags * bits_per_tag");
  for (std::size_t k = 0; k < num_tags; ++k) {
    std::size_t ones = 0;
    for (std::size_t b = 0; b < bits_per_tag; ++b) ones += bit(k, b) ? 1 : 0;
    if (ones == 0 || ones == bits_per_tag)
      throw std::invalid_argument("tag " + std::to_string(k) +
                                  " pattern needs both reflecting and absorbing bits");
  }
}

std::vector<BitTemplate::Run> BitTemplate::reflecting_runs() const {
  std::vector<Run> runs;
  const std::size_t n = bits.size();
  for (std::size_t b = 0; b < n;) {
    if (bits[b] == 0) {
      ++b;
      continue;
    }
    std::size_t e = b;
    while (e < n && bits[e] != 0) ++e;
    runs.push_back({b * samples_per_bit, e * samples_per_bit});
    b = e;
  }
  return runs;
}

std::vector<double> moving_average(std::span<const double> samples, std::size_t window) {
  if (window == 0) throw std::invalid_argument("moving_average: window must be >= 1");
  if (window > samples.size())
    throw std::invalid_argument("moving_average: window " + std::to_string(window) +
                                " exceeds trace length " + std::to_string(samples.size()));
  std::vector<double> out(samples.size() - window + 1);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < window; ++i) acc += samples[i];
  out[0] = static_cast<double>(acc / window);
  for (std::size_t n = 1; n < out.size(); ++n) {
    acc += samples[n + window - 1];
    acc -= samples[n - 1];
    out[n] = static_cast<double>(acc / window);
  }
  return out;
}

std::size_t default_smoothing_window(std::size_t samples_per_bit) {
  std::size_t w = std::max<std::size_t>(1, samples_per_bit / 5);
  if (w % 2 == 0) ++w;
  return w;
}

std::vector<double> template_correlation(std::span<const double> signal,
                                         const BitTemplate& bit_template) {
  const std::size_t length = bit_template.sample_length();
  if (signal.size() < length)
    throw std::invalid_argument("trace of " + std::to_string(signal.size()) +
                                " samples is shorter than the " + std::to_string(length) +
                                "-sample template");
  std::vector<long double> prefix(signal.size() + 1, 0.0L);
  for (std::size_t i = 0; i < signal.size(); ++i) prefix[i + 1] = prefix[i] + signal[i];
  const auto runs = bit_template.reflecting_runs();
  std::vector<double> c(signal.size() - length + 1);
  for (std::size_t n = 0; n < c.size(); ++n) {
    long double acc = 0.0L;
    for (const auto& run : runs) acc += prefix[n + run.end] - prefix[n + run.begin];
    c[n] = static_cast<double>(acc);
  }
  return c;
}

BackscatterWindow locate_backscatter(std::span<const double> smoothed,
                                     const BitTemplate& bit_template) {
  const auto c = template_correlation(smoothed, bit_template);
  const auto best = std::max_element(c.begin(), c.end());
  const auto start = static_cast<std::size_t>(best - c.begin());
  return {start, start + bit_template.sample_length()};
}

BackscatterSegment segment_backscatter(std::span<const double> raw,
                                       const BitTemplate& bit_template,
                                       std::size_t smoothing_window) {
  const std::size_t length = bit_template.sample_length();
  const auto smoothed = moving_average(raw, smoothing_window);
  BackscatterSegment seg;
  seg.window = locate_backscatter(smoothed, bit_template);

  // The smoothed peak sits (w-1)/2 samples before the raw onset; search the
  // whole window on the raw trace rather than trusting that offset.
  const std::size_t last_valid = raw.size() - length;
  const std::size_t lo = std::min(seg.window.t_start, last_valid);
  const std::size_t hi = std::min(seg.window.t_start + smoothing_window - 1, last_valid);
  const auto runs = bit_template.reflecting_runs();
  long double best = 0.0L;
  std::size_t onset = lo;
  for (std::size_t n = lo; n <= hi; ++n) {
    long double acc = 0.0L;
    for (const auto& run : runs)
      for (std::size_t t = run.begin; t < run.end; ++t) acc += raw[n + t];
    if (n == lo || acc > best) {
      best = acc;
      onset = n;
    }
  }
  seg.onset = onset;

  const std::size_t per_tag = bit_template.tag_sample_length();
  seg.tag_segments.reserve(bit_template.num_tags);
  for (std::size_t k = 0; k < bit_template.num_tags; ++k) {
    const auto first = raw.begin() + static_cast<std::ptrdiff_t>(onset + k * per_tag);
    seg.tag_segments.emplace_back(first, first + static_cast<std::ptrdiff_t>(per_tag));
  }
  return seg;
}

MultipathSignature extract_signature(const std::vector<std::vector<double>>& tag_segments,
                                     const BitTemplate& bit_template) {
  if (tag_segments.size() != bit_template.num_tags)
    throw std::invalid_argument("expected " + std::to_string(bit_template.num_tags) +
                                " tag segments, got " + std::to_string(tag_segments.size()));
  MultipathSignature sig;
  sig.reflections.reserve(tag_segments.size());
  const std::size_t spb = bit_template.samples_per_bit;
  for (std::size_t k = 0; k < tag_segments.size(); ++k) {
    const auto& seg = tag_segments[k];
    if (seg.size() != bit_template.tag_sample_length())
      throw std::invalid_argument("tag segment " + std::to_string(k) + " has wrong length");
    // Long double keeps sums of repeated values exact on noiseless traces.
    long double on = 0.0L;
    long double off = 0.0L;
    std::size_t n_on = 0;
    std::size_t n_off = 0;
    for (std::size_t t = 0; t < seg.size(); ++t) {
      if (bit_template.bit(k, t / spb)) {
        on += seg[t];
        ++n_on;
      } else {
        off += seg[t];
        ++n_off;
      }
    }
    if (n_on == 0 || n_off == 0)
      throw std::invalid_argument("tag " + std::to_string(k) +
                                  " needs both reflecting and absorbing samples");
    const double mean_on = static_cast<double>(on / n_on);
    const double mean_off = static_cast<double>(off / n_off);
    sig.reflections.push_back(mean_on - mean_off);
  }
  return sig;
}

ProfileSet build_profiles(std::span<const SignatureRecord> records, std::size_t length) {
  if (length == 0) throw std::invalid_argument("profile length must be >= 1");
  ProfileSet out;
  if (records.empty()) return out;

  int max_slot = 0;
  std::map<IdentityId, std::map<int, const SignatureRecord*>> by_id;
  for (const auto& rec : records) {
    if (rec.slot < 0) throw std::invalid_argument("negative slot in signature stream");
    max_slot = std::max(max_slot, rec.slot);
    by_id[rec.claimed_id][rec.slot] = &rec;
  }
  const int windows = (max_slot + 1) / static_cast<int>(length);
  for (int w = 0; w < windows; ++w) {
    const int first = w * static_cast<int>(length);
    for (const auto& [id, slots] : by_id) {
      SignalProfile profile;
      profile.claimed_id = id;
      profile.window = w;
      bool complete = true;
      for (int s = first; s < first + static_cast<int>(length); ++s) {
        const auto it = slots.find(s);
        if (it == slots.end()) {
          complete = false;
          break;
        }
        profile.slots.push_back(s);
        profile.signatures.push_back(it->second->signature);
      }
      if (complete) {
        out.profiles.push_back(std::move(profile));
      } else {
        out.discarded.push_back({id, w});
      }
    }
  }
  return out;
}

}  // namespace scatterid
