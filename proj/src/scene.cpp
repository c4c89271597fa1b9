#include "scatterid/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scatterid {

namespace {

constexpr double kMinTagDistance = 0.01;
constexpr int kMaxPlacementAttempts = 10000;
constexpr int kMaxWaypointAttempts = 1000;
constexpr int kMultipathWaves = 16;

double segment_point_distance(Point2 a, Point2 b, Point2 p) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(a, p);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return distance({a.x + t * dx, a.y + t * dy}, p);
}

Point2 uniform_point(const ScenarioConfig& config, Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, config.arena_width);
  std::uniform_real_distribution<double> uy(0.0, config.arena_height);
  const double x = ux(rng);
  const double y = uy(rng);
  return {x, y};
}

Point2 next_waypoint(const ScenarioConfig& config, Point2 from, Rng& rng) {
  const Point2 rx = config.receiver();
  for (int attempt = 0; attempt < kMaxWaypointAttempts; ++attempt) {
    const Point2 candidate = uniform_point(config, rng);
    if (segment_point_distance(from, candidate, rx) > config.receiver_keepout) return candidate;
  }
  return from;
}

}  // namespace

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string_view to_string(AttackMode mode) {
  switch (mode) {
    case AttackMode::kBasic:
      return "basic";
    case AttackMode::kPowerScaling:
      return "power_scaling";
    case AttackMode::kColluding:
      return "colluding";
  }
  return "basic";
}

AttackMode parse_attack_mode(std::string_view text) {
  if (text == "basic") return AttackMode::kBasic;
  if (text == "power_scaling" || text == "power-scaling") return AttackMode::kPowerScaling;
  if (text == "colluding") return AttackMode::kColluding;
  throw ConfigError("attack_mode", "unknown attack mode '" + std::string(text) + "'");
}

Point2 ScenarioConfig::receiver() const {
  return receiver_position.value_or(Point2{arena_width / 2.0, arena_height / 2.0});
}

std::vector<Point2> ScenarioConfig::effective_tag_offsets() const {
  if (!tag_offsets.empty()) return tag_offsets;
  return ring_tag_offsets(num_tags, tag_ring_radius);
}

BitTemplate ScenarioConfig::bit_template() const {
  return BitTemplate::standard(static_cast<std::size_t>(num_tags),
                               static_cast<std::size_t>(bits_per_tag),
                               static_cast<std::size_t>(samples_per_bit));
}

void ScenarioConfig::validate() const {
  if (!(arena_width > 0.0)) throw ConfigError("arena_width", "must be positive");
  if (!(arena_height > 0.0)) throw ConfigError("arena_height", "must be positive");
  if (num_legit < 0) throw ConfigError("num_legit", "must be non-negative");
  if (num_attackers < 0) throw ConfigError("num_attackers", "must be non-negative");
  if (num_fake_ids < 0) throw ConfigError("num_fake_ids", "must be non-negative");
  if (num_fake_ids > 0 && num_attackers < 1)
    throw ConfigError("num_attackers", "fake IDs need at least one attacker");
  if (num_attackers > 0 && num_fake_ids < num_attackers)
    throw ConfigError("num_fake_ids", "every attacker needs at least one fake ID");
  if (attack_mode == AttackMode::kColluding) {
    if (num_attackers < 1) throw ConfigError("num_attackers", "colluding needs attackers");
    if (num_fake_ids % num_attackers != 0)
      throw ConfigError("num_fake_ids", "must be divisible by num_attackers when colluding");
  }
  if (num_ids() < 2) throw ConfigError("num_legit", "need at least two claimed IDs");
  if (!(robot_speed >= 0.0)) throw ConfigError("robot_speed", "must be non-negative");
  if (!(slot_interval > 0.0)) throw ConfigError("slot_interval", "must be positive");
  if (num_slots < 1) throw ConfigError("num_slots", "must be at least 1");
  if (num_tags < 1) throw ConfigError("num_tags", "must be at least 1");
  if (!tag_offsets.empty() && tag_offsets.size() != static_cast<std::size_t>(num_tags))
    throw ConfigError("tag_offsets", "must have exactly num_tags entries");
  const auto offsets = effective_tag_offsets();
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    for (std::size_t j = i + 1; j < offsets.size(); ++j) {
      if (offsets[i] == offsets[j]) throw ConfigError("tag_offsets", "entries must be distinct");
    }
    if (!(std::hypot(offsets[i].x, offsets[i].y) > 0.0))
      throw ConfigError("tag_offsets", "tags cannot sit on the receiver");
  }
  if (!(tag_gain > 0.0)) throw ConfigError("tag_gain", "must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma", "must be non-negative");
  if (power_scale_set.empty()) throw ConfigError("power_scale_set", "must be nonempty");
  for (double s : power_scale_set) {
    if (!(s > 0.0)) throw ConfigError("power_scale_set", "entries must be positive");
  }
  const Point2 rx = receiver();
  if (rx.x < 0.0 || rx.x > arena_width || rx.y < 0.0 || rx.y > arena_height)
    throw ConfigError("receiver_position", "must lie inside the arena");
  if (!(tag_ring_radius > 0.0)) throw ConfigError("tag_ring_radius", "must be positive");
  if (!(receiver_keepout >= 0.0)) throw ConfigError("receiver_keepout", "must be non-negative");
  if (!(min_start_separation >= 0.0))
    throw ConfigError("min_start_separation", "must be non-negative");
  if (!(direct_amplitude >= 0.0)) throw ConfigError("direct_amplitude", "must be non-negative");
  if (!(multipath_jitter >= 0.0)) throw ConfigError("multipath_jitter", "must be non-negative");
  if (!(multipath_wavelength > 0.0))
    throw ConfigError("multipath_wavelength", "must be positive");
  if (samples_per_bit < 1) throw ConfigError("samples_per_bit", "must be at least 1");
  if (bits_per_tag < 2) throw ConfigError("bits_per_tag", "must be at least 2");
  if (min_padding < 0 || max_padding < min_padding)
    throw ConfigError("min_padding", "need 0 <= min_padding <= max_padding");
}

ScenarioConfig office_preset() { return ScenarioConfig{}; }

ScenarioConfig rooftop_preset() {
  ScenarioConfig config;
  config.arena_width = 8.0;
  config.arena_height = 10.0;
  config.multipath_jitter = 0.05;  // few reflectors outdoors
  return config;
}

std::vector<Point2> ring_tag_offsets(int num_tags, double radius) {
  std::vector<Point2> offsets;
  offsets.reserve(static_cast<std::size_t>(std::max(num_tags, 0)));
  for (int k = 0; k < num_tags; ++k) {
    const double angle = 2.0 * M_PI * k / num_tags;
    offsets.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }
  return offsets;
}

std::vector<IdentityId> all_ids(const ScenarioConfig& config) {
  std::vector<IdentityId> ids;
  for (int i = 0; i < config.num_ids(); ++i) ids.push_back({i});
  return ids;
}

bool is_fake(const ScenarioConfig& config, IdentityId id) { return id.value >= config.num_legit; }

int attacker_robot(const ScenarioConfig& config, int attacker_index) {
  return config.num_legit + attacker_index;
}

std::vector<std::vector<IdentityId>> static_fake_assignment(const ScenarioConfig& config) {
  std::vector<std::vector<IdentityId>> groups(static_cast<std::size_t>(config.num_attackers));
  if (config.num_attackers == 0) return groups;
  const int base = config.num_fake_ids / config.num_attackers;
  const int extra = config.num_fake_ids % config.num_attackers;
  int next = config.num_legit;
  for (int a = 0; a < config.num_attackers; ++a) {
    const int count = base + (a < extra ? 1 : 0);
    for (int j = 0; j < count; ++j) groups[static_cast<std::size_t>(a)].push_back({next++});
  }
  return groups;
}

std::vector<Trajectory> generate_trajectories(const ScenarioConfig& config) {
  config.validate();
  const Point2 rx = config.receiver();
  const auto robots = static_cast<std::size_t>(config.num_robots());

  Rng start_rng = make_stream(config.rng_seed, StreamPurpose::kStart);
  std::vector<Point2> starts;
  for (std::size_t r = 0; r < robots; ++r) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const Point2 p = uniform_point(config, start_rng);
      if (distance(p, rx) <= config.receiver_keepout) continue;
      const bool clear = std::all_of(starts.begin(), starts.end(), [&](Point2 q) {
        return distance(p, q) >= config.min_start_separation;
      });
      if (clear && (starts.empty() || std::none_of(starts.begin(), starts.end(),
                                                   [&](Point2 q) { return q == p; }))) {
        starts.push_back(p);
        placed = true;
      }
    }
    if (!placed)
      throw ConfigError("arena_width", "arena too small to hold distinct start positions for " +
                                           std::to_string(robots) + " robots");
  }

  const double step = config.robot_speed * config.slot_interval;
  std::vector<Trajectory> out(robots);
  for (std::size_t r = 0; r < robots; ++r) {
    Rng rng = make_stream(config.rng_seed, StreamPurpose::kTrajectory, {r});
    auto& positions = out[r].positions;
    positions.reserve(static_cast<std::size_t>(config.num_slots));
    Point2 current = starts[r];
    Point2 waypoint = next_waypoint(config, current, rng);
    positions.push_back(current);
    for (int slot = 1; slot < config.num_slots; ++slot) {
      double remaining = step;
      // Bounded so a degenerate waypoint sequence cannot spin forever.
      for (int hops = 0; remaining > 0.0 && hops < 64; ++hops) {
        const double d = distance(current, waypoint);
        if (d <= remaining) {
          current = waypoint;
          remaining -= d;
          waypoint = next_waypoint(config, current, rng);
        } else {
          const double f = remaining / d;
          current = {current.x + (waypoint.x - current.x) * f,
                     current.y + (waypoint.y - current.y) * f};
          remaining = 0.0;
        }
      }
      positions.push_back(current);
    }
  }
  return out;
}

std::vector<TransmissionEvent> schedule_transmissions(const ScenarioConfig& config, int slot,
                                                      Rng& rng) {
  if (slot < 0 || slot >= config.num_slots)
    throw std::out_of_range("slot " + std::to_string(slot) + " outside [0, num_slots)");

  std::vector<TransmissionEvent> events;
  events.reserve(static_cast<std::size_t>(config.num_ids()));
  for (int i = 0; i < config.num_legit; ++i) events.push_back({slot, {i}, i, 1.0});

  std::vector<std::vector<IdentityId>> groups;
  if (config.attack_mode == AttackMode::kColluding) {
    std::vector<IdentityId> fakes;
    for (int j = 0; j < config.num_fake_ids; ++j) fakes.push_back({config.num_legit + j});
    std::shuffle(fakes.begin(), fakes.end(), rng);
    const auto per = static_cast<std::size_t>(config.num_fake_ids / config.num_attackers);
    groups.resize(static_cast<std::size_t>(config.num_attackers));
    for (std::size_t j = 0; j < fakes.size(); ++j) groups[j / per].push_back(fakes[j]);
  } else {
    groups = static_fake_assignment(config);
  }

  std::uniform_int_distribution<std::size_t> pick(0, config.power_scale_set.size() - 1);
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (IdentityId id : groups[a]) {
      double power = 1.0;
      if (config.attack_mode == AttackMode::kPowerScaling) power = config.power_scale_set[pick(rng)];
      events.push_back({slot, id, attacker_robot(config, static_cast<int>(a)), power});
    }
  }
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.claimed_id < b.claimed_id; });
  return events;
}

std::vector<TransmissionEvent> schedule_transmissions(const ScenarioConfig& config, int slot) {
  Rng rng = make_stream(config.rng_seed, StreamPurpose::kSchedule,
                        {static_cast<std::uint64_t>(slot)});
  return schedule_transmissions(config, slot, rng);
}

std::vector<double> reflected_amplitudes(double transmit_power, Point2 emitter_pos,
                                         const ScenarioConfig& config) {
  const Point2 rx = config.receiver();
  std::vector<double> amps;
  for (Point2 off : config.effective_tag_offsets()) {
    const Point2 tag{rx.x + off.x, rx.y + off.y};
    const double d_kt = distance(emitter_pos, tag);
    if (d_kt < kMinTagDistance)
      throw SingularityError("emitter within 1 cm of a tag at (" + std::to_string(tag.x) + ", " +
                             std::to_string(tag.y) + ")");
    const double d_kr = std::hypot(off.x, off.y);
    const double power = transmit_power * config.tag_gain / (d_kt * d_kt * d_kr * d_kr);
    amps.push_back(std::sqrt(power));
  }
  return amps;
}

std::vector<double> multipath_gains(Point2 emitter_pos, const ScenarioConfig& config) {
  const auto tags = static_cast<std::size_t>(config.num_tags);
  std::vector<double> gains(tags, 1.0);
  if (config.multipath_jitter <= 0.0) return gains;
  const double wavenumber = 2.0 * M_PI / config.multipath_wavelength;
  const double norm = std::sqrt(2.0 / kMultipathWaves);
  for (std::size_t k = 0; k < tags; ++k) {
    Rng rng = make_stream(config.rng_seed, StreamPurpose::kMultipath, {k});
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    double field = 0.0;
    for (int j = 0; j < kMultipathWaves; ++j) {
      const double direction = angle(rng);
      const double phase = angle(rng);
      field += std::cos(wavenumber * (emitter_pos.x * std::cos(direction) +
                                      emitter_pos.y * std::sin(direction)) +
                        phase);
    }
    gains[k] = std::max(0.0, 1.0 + config.multipath_jitter * norm * field);
  }
  return gains;
}

SampleTrace synthesize_received_signal(const TransmissionEvent& event, Point2 emitter_pos,
                                       const ScenarioConfig& config,
                                       const BitTemplate& bit_template, Rng& rng) {
  SampleTrace trace;
  trace.tag_amplitudes = reflected_amplitudes(event.transmit_power, emitter_pos, config);

  std::uniform_int_distribution<int> pad(config.min_padding, config.max_padding);
  const auto lead = static_cast<std::size_t>(pad(rng));
  const auto trail = static_cast<std::size_t>(pad(rng));

  if (config.multipath_jitter > 0.0) {
    const auto gains = multipath_gains(emitter_pos, config);
    for (std::size_t k = 0; k < gains.size(); ++k) trace.tag_amplitudes[k] *= gains[k];
  }

  const std::size_t region = bit_template.sample_length();
  const std::size_t per_tag = bit_template.tag_sample_length();
  trace.ground_truth_start = lead;
  trace.samples.assign(lead + region + trail, config.direct_amplitude);
  for (std::size_t t = 0; t < region; ++t) {
    if (bit_template.reflecting_at(t))
      trace.samples[lead + t] += trace.tag_amplitudes[t / per_tag];
  }
  if (config.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, config.noise_sigma);
    for (double& s : trace.samples) s = std::max(0.0, s + noise(rng));
  }
  return trace;
}

Rng trace_stream(const ScenarioConfig& config, int slot, IdentityId id) {
  return make_stream(config.rng_seed, StreamPurpose::kTrace,
                     {static_cast<std::uint64_t>(slot), static_cast<std::uint64_t>(id.value)});
}

SampleTrace synthesize_received_signal(const TransmissionEvent& event, Point2 emitter_pos,
                                       const ScenarioConfig& config) {
  Rng rng = trace_stream(config, event.slot, event.claimed_id);
  return synthesize_received_signal(event, emitter_pos, config, config.bit_template(), rng);
}

}  // namespace scatterid
