#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scatterid/bit_template.hpp"
#include "scatterid/rng.hpp"

namespace scatterid {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

/// Claimed network identity. Legitimate IDs come first, fake IDs after.
struct IdentityId {
  int value = 0;
  friend auto operator<=>(const IdentityId&, const IdentityId&) = default;
};

enum class AttackMode { kBasic, kPowerScaling, kColluding };

std::string_view to_string(AttackMode mode);
AttackMode parse_attack_mode(std::string_view text);

/// Raised for invalid scenario parameters; names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Emitter too close to a tag for the far-field reflection model.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ScenarioConfig {
  double arena_width = 4.5;
  double arena_height = 5.5;
  int num_legit = 2;
  int num_attackers = 1;
  int num_fake_ids = 3;
  AttackMode attack_mode = AttackMode::kBasic;
  double robot_speed = 0.2;
  double slot_interval = 0.6;
  int num_slots = 60;
  int num_tags = 4;
  std::vector<Point2> tag_offsets;  // empty: ring of tag_ring_radius
  double tag_gain = 1e-3;
  double noise_sigma = 0.05;
  std::vector<double> power_scale_set{0.3, 0.6, 0.9};
  std::uint64_t rng_seed = 0;

  // Simulator knobs.
  std::optional<Point2> receiver_position;  // default: arena centre
  double tag_ring_radius = 0.12;
  double receiver_keepout = 0.4;
  double min_start_separation = 0.3;
  double direct_amplitude = 1.0;
  double multipath_jitter = 0.1;       // relative std of per-tag spatial fading
  double multipath_wavelength = 0.125;  // fading decorrelates over about this distance
  int samples_per_bit = 50;
  int bits_per_tag = 16;
  int min_padding = 100;
  int max_padding = 400;

  Point2 receiver() const;
  /// Tag positions relative to the receiver, filling in the default ring.
  std::vector<Point2> effective_tag_offsets() const;
  int num_robots() const { return num_legit + num_attackers; }
  int num_ids() const { return num_legit + num_fake_ids; }
  BitTemplate bit_template() const;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

ScenarioConfig office_preset();
ScenarioConfig rooftop_preset();

/// K tags evenly spaced on a circle around the receiver.
std::vector<Point2> ring_tag_offsets(int num_tags, double radius);

std::vector<IdentityId> all_ids(const ScenarioConfig& config);
bool is_fake(const ScenarioConfig& config, IdentityId id);
int attacker_robot(const ScenarioConfig& config, int attacker_index);

/// Static split of fake IDs over attackers used by the basic and
/// power-scaling modes: contiguous, as even as possible.
std::vector<std::vector<IdentityId>> static_fake_assignment(const ScenarioConfig& config);

struct Trajectory {
  std::vector<Point2> positions;  // one per slot
};

/// Random-waypoint paths for every physical robot (legitimate robots first,
/// then attackers). Paths avoid a keep-out disc around the receiver.
std::vector<Trajectory> generate_trajectories(const ScenarioConfig& config);

struct TransmissionEvent {
  int slot = 0;
  IdentityId claimed_id;
  int emitter = 0;
  double transmit_power = 1.0;
};

/// One event per claimed ID for the given slot, ordered by ID.
std::vector<TransmissionEvent> schedule_transmissions(const ScenarioConfig& config, int slot,
                                                      Rng& rng);

/// Same as above with the slot's stream derived from config.rng_seed.
std::vector<TransmissionEvent> schedule_transmissions(const ScenarioConfig& config, int slot);

struct SampleTrace {
  std::vector<double> samples;
  std::size_t ground_truth_start = 0;
  std::vector<double> tag_amplitudes;  // simulator metadata, one per tag
};

/// Per-tag reflected amplitude sqrt(P_t * gain / (d_kt^2 * d_kr^2)).
std::vector<double> reflected_amplitudes(double transmit_power, Point2 emitter_pos,
                                         const ScenarioConfig& config);

/// Per-tag multiplicative fading at an emitter position: a fixed random
/// superposition of plane waves per tag, unit variance, scaled by
/// multipath_jitter and clipped at zero. Identity when the knob is off.
/// Every ID emitted from the same spot sees the same gains.
std::vector<double> multipath_gains(Point2 emitter_pos, const ScenarioConfig& config);

SampleTrace synthesize_received_signal(const TransmissionEvent& event, Point2 emitter_pos,
                                       const ScenarioConfig& config,
                                       const BitTemplate& bit_template, Rng& rng);

/// Convenience overload using config.bit_template() and the event's stream.
SampleTrace synthesize_received_signal(const TransmissionEvent& event, Point2 emitter_pos,
                                       const ScenarioConfig& config);

Rng trace_stream(const ScenarioConfig& config, int slot, IdentityId id);

}  // namespace scatterid
