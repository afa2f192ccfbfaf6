#include "driveframe/synth.hpp"

#include "driveframe/circular.hpp"
#include "driveframe/errors.hpp"
#include "driveframe/timeutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace driveframe::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double truncated_gauss(std::mt19937_64& rng, double sigma) {
    if (sigma <= 0.0) return 0.0;
    std::normal_distribution<double> g(0.0, sigma);
    return std::clamp(g(rng), -4.0 * sigma, 4.0 * sigma);
}

struct TripSketch {
    std::size_t original_index = 0;
    double start_ts = 0.0;
    bool influenced = false;
    double cruise_s = 0.0;
    std::vector<EventKind> kinds;  // events to inject, in slot order
    std::uint64_t seed = 0;
};

// Largest-remainder allocation of `total` events across kinds.
std::vector<EventKind> allocate_kinds(const std::map<EventKind, double>& weights,
                                      std::size_t total) {
    double wsum = 0.0;
    for (const auto& [kind, w] : weights) wsum += std::max(0.0, w);
    std::vector<EventKind> out;
    if (wsum <= 0.0 || total == 0) return out;

    std::vector<std::pair<EventKind, double>> remainder;
    std::size_t assigned = 0;
    for (EventKind k : kAllEventKinds) {
        const double w = weights.count(k) ? std::max(0.0, weights.at(k)) : 0.0;
        const double q = static_cast<double>(total) * w / wsum;
        const auto floor_q = static_cast<std::size_t>(std::floor(q));
        assigned += floor_q;
        for (std::size_t i = 0; i < floor_q; ++i) out.push_back(k);
        remainder.emplace_back(k, q - std::floor(q));
    }
    std::stable_sort(remainder.begin(), remainder.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned)
        out.push_back(remainder[i % remainder.size()].first);
    return out;
}

constexpr double kRampAccel = 1.5;        // m/s^2 for gentle speed changes
constexpr double kEventRamp = 2.0;        // m/s^2 entering/leaving a maneuver
constexpr double kCourseRejoin = 5.0;     // deg/s drift back to the plan
constexpr double kStartJitterS = 30.0;    // random offset within a slot
constexpr std::size_t kLeadSamples = 5;   // stationary samples either side
constexpr std::size_t kSlotSamples = 35;  // reserved span per injected event
constexpr std::size_t kGuardTail = 24;    // guard zone length past an anchor
// No event before the default trip-start hold has matured: a braking dip
// during a pending start would reset the window and strand the event
// outside the confirmed trip.
constexpr std::size_t kHoldGuard = 35;

struct TripBuild {
    std::vector<SensorSample> samples;
    ManifestTrip manifest;
};

TripBuild build_trip(const TripSketch& sketch, const ScenarioConfig& cfg) {
    std::mt19937_64 rng(sketch.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const ThresholdProfile& thr = cfg.thresholds;
    const double dt = cfg.sample_period_s;

    const double cruise_base = sketch.influenced ? 10.0 : 10.5 + 2.5 * unit(rng);
    const double wander_a = sketch.influenced ? cfg.influenced_speed_wander : 0.0;
    const double wander_b = sketch.influenced ? cfg.influenced_course_wander : 0.0;
    const double course_base = 360.0 * unit(rng);
    const double phase = 2.0 * std::numbers::pi * unit(rng);

    const std::size_t n_events = sketch.kinds.size();
    std::size_t cruise_n = static_cast<std::size_t>(std::ceil(sketch.cruise_s / dt));
    cruise_n = std::max(cruise_n, n_events * kSlotSamples + kHoldGuard + 40);

    auto cruise_speed = [&](std::size_t cruise_i) {
        const double t = static_cast<double>(cruise_i) * dt;
        return cruise_base + wander_a * std::sin(2.0 * std::numbers::pi * t / 60.0 + phase);
    };
    auto cruise_course = [&](std::size_t cruise_i) {
        const double t = static_cast<double>(cruise_i) * dt;
        return course_base + wander_b * std::sin(2.0 * std::numbers::pi * t / 80.0 + phase);
    };

    const double entry_speed = std::max(cruise_speed(0), 0.5);
    const auto ramp_up =
        static_cast<std::size_t>(std::ceil(entry_speed / (kRampAccel * dt)));
    const std::size_t cruise_begin = kLeadSamples + ramp_up;
    const auto ramp_down = static_cast<std::size_t>(
        std::ceil(std::max(cruise_speed(cruise_n - 1), 0.5) / (kRampAccel * dt)));
    const std::size_t total_n = cruise_begin + cruise_n + ramp_down + kLeadSamples;

    // The planned, violation-free trajectory.
    std::vector<double> planned_speed(total_n, 0.0), planned_course(total_n, course_base);
    for (std::size_t i = 0; i < total_n; ++i) {
        if (i < kLeadSamples) {
            planned_speed[i] = 0.0;
            planned_course[i] = cruise_course(0);
        } else if (i < cruise_begin) {
            planned_speed[i] = std::min(
                entry_speed, static_cast<double>(i - kLeadSamples + 1) * kRampAccel * dt);
            planned_course[i] = cruise_course(0);
        } else if (i < cruise_begin + cruise_n) {
            planned_speed[i] = cruise_speed(i - cruise_begin);
            planned_course[i] = cruise_course(i - cruise_begin);
        } else {
            planned_speed[i] = std::max(0.0, planned_speed[i - 1] - kRampAccel * dt);
            planned_course[i] = planned_course[i - 1];
        }
    }

    std::vector<double> speed = planned_speed;
    std::vector<double> course = planned_course;
    std::vector<bool> guarded(total_n, false);

    // Ramp from the written value at index `from` back onto the planned
    // curve; returns the last index written.
    auto rejoin_speed = [&](std::size_t from) {
        std::size_t i = from;
        while (i + 1 < total_n) {
            const double target = planned_speed[i + 1];
            const double step = kEventRamp * dt;
            if (std::fabs(speed[i] - target) <= step) {
                speed[i + 1] = target;
                return i + 1;
            }
            speed[i + 1] = speed[i] + (target > speed[i] ? step : -step);
            ++i;
        }
        return i;
    };
    auto rejoin_course = [&](std::size_t from) {
        std::size_t i = from;
        while (i + 1 < total_n) {
            const double target = planned_course[i + 1];
            const double step = kCourseRejoin * dt;
            if (std::fabs(course[i] - target) <= step) {
                course[i + 1] = target;
                return i + 1;
            }
            course[i + 1] = course[i] + (target > course[i] ? step : -step);
            ++i;
        }
        return i;
    };

    ManifestTrip manifest;
    manifest.index = sketch.original_index;
    manifest.influenced = sketch.influenced;

    auto ts_of = [&](std::size_t i) { return sketch.start_ts + static_cast<double>(i) * dt; };

    std::uniform_real_distribution<double> factor(1.3, 1.5);
    for (std::size_t e = 0; e < n_events; ++e) {
        const std::size_t anchor = cruise_begin + kHoldGuard + e * kSlotSamples + 5 +
                                   static_cast<std::size_t>(unit(rng) * 3.0);
        const EventKind kind = sketch.kinds[e];
        const double v0 = speed[anchor];
        InjectedEvent inj;
        inj.kind = kind;
        inj.start_ts = ts_of(anchor);

        switch (kind) {
            case EventKind::HarshAcceleration: {
                const double mag = thr.accel_limit * factor(rng);
                speed[anchor + 1] = v0 + mag * dt;
                rejoin_speed(anchor + 1);
                inj.end_ts = ts_of(anchor + 1);
                inj.magnitude = mag;
                break;
            }
            case EventKind::HarshBraking: {
                const double mag = braking_threshold(v0, thr) * factor(rng);
                speed[anchor + 1] = std::max(1.6, v0 - mag * dt);
                rejoin_speed(anchor + 1);
                inj.end_ts = ts_of(anchor + 1);
                inj.magnitude = -(v0 - speed[anchor + 1]) / dt;
                break;
            }
            case EventKind::Speeding: {
                const double limit = thr.speed_limit * (1.0 + thr.speed_margin);
                const double plateau = limit * (1.10 + 0.08 * unit(rng));
                const auto hold =
                    static_cast<std::size_t>(std::ceil(thr.speed_min_dur / dt)) + 3;
                std::size_t i = anchor;
                while (speed[i] < plateau - 1e-9) {
                    speed[i + 1] = std::min(plateau, speed[i] + kEventRamp * dt);
                    ++i;
                }
                for (std::size_t h = 0; h < hold; ++h, ++i) speed[i + 1] = plateau;
                const std::size_t core_end = i;
                rejoin_speed(core_end);
                inj.end_ts = ts_of(core_end);
                inj.magnitude = plateau;
                break;
            }
            case EventKind::Swerving: {
                const double rate = thr.swerve_limit * factor(rng);
                course[anchor + 1] = course[anchor] + rate * dt;
                course[anchor + 2] = course[anchor];
                rejoin_course(anchor + 2);
                inj.end_ts = ts_of(anchor + 2);
                inj.magnitude = rate;
                break;
            }
        }
        manifest.events.push_back(inj);
        const std::size_t guard_lo = anchor > 2 ? anchor - 2 : 0;
        for (std::size_t i = guard_lo; i <= anchor + kGuardTail && i < total_n; ++i)
            guarded[i] = true;
    }

    // Noise everywhere in the cruise outside guard zones; truncated so a
    // clean stretch can never cross a detection threshold.
    for (std::size_t i = cruise_begin; i < cruise_begin + cruise_n; ++i) {
        if (guarded[i]) continue;
        speed[i] = std::max(0.0, speed[i] + truncated_gauss(rng, cfg.speed_noise));
        course[i] += truncated_gauss(rng, cfg.course_noise);
    }

    TripBuild out;
    out.samples.reserve(total_n);
    double lat = 6.45 + 0.0005 * static_cast<double>(sketch.original_index % 97);
    double lon = 3.39;
    const double ay_noise = sketch.influenced ? 0.25 : 0.05;
    for (std::size_t i = 0; i < total_n; ++i) {
        SensorSample s;
        s.ts = ts_of(i);
        double c = std::fmod(course[i], 360.0);
        if (c < 0.0) c += 360.0;
        s.course = c;
        s.speed = speed[i];
        if (i > 0) {
            lat += speed[i] * std::cos(c * kDegToRad) * dt / 111320.0;
            lon += speed[i] * std::sin(c * kDegToRad) * dt /
                   (111320.0 * std::cos(lat * kDegToRad));
        }
        s.lat = lat;
        s.lon = lon;
        const double long_accel = i > 0 ? (speed[i] - speed[i - 1]) / dt : 0.0;
        s.ay = long_accel + truncated_gauss(rng, ay_noise);
        s.ax = truncated_gauss(rng, 0.05);
        s.az = 9.81 + truncated_gauss(rng, 0.05);
        out.samples.push_back(s);
    }

    manifest.start_ts = out.samples.front().ts;
    manifest.end_ts = out.samples.back().ts;
    out.manifest = std::move(manifest);
    return out;
}

} // namespace

std::size_t GroundTruthManifest::total_events() const {
    std::size_t n = 0;
    for (const auto& t : trips) n += t.events.size();
    return n;
}

std::map<EventKind, std::size_t> GroundTruthManifest::events_by_kind() const {
    std::map<EventKind, std::size_t> out;
    for (EventKind k : kAllEventKinds) out[k] = 0;
    for (const auto& t : trips)
        for (const auto& e : t.events) ++out[e.kind];
    return out;
}

Corpus generate_corpus(const ScenarioConfig& cfg) {
    if (cfg.influenced_fraction < 0.0 || cfg.influenced_fraction > 1.0)
        throw ValidationError("synth: influenced_fraction must be in [0, 1]");
    if (cfg.events_per_trip < 0.0)
        throw ValidationError("synth: events_per_trip must be >= 0");
    if (cfg.sample_period_s <= 0.0)
        throw ValidationError("synth: sample_period_s must be positive");
    if (cfg.min_cruise_s <= 0.0 || cfg.max_cruise_s < cfg.min_cruise_s)
        throw ValidationError("synth: bad cruise duration range");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t n = cfg.trip_count;
    Corpus corpus;
    corpus.manifest.driver_id = cfg.driver_id;
    if (n == 0) return corpus;

    // Influenced flags, shuffled so the label does not track trip index.
    std::vector<bool> influenced(n, false);
    const auto n_influenced = static_cast<std::size_t>(
        std::lround(cfg.influenced_fraction * static_cast<double>(n)));
    for (std::size_t i = 0; i < n_influenced && i < n; ++i) influenced[i] = true;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(unit(rng) * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(influenced[i - 1], influenced[j]);
    }

    // Event kinds by largest remainder, shuffled, dealt out round-robin, so
    // injected proportions match the configured weights exactly.
    const auto total_events = static_cast<std::size_t>(
        std::lround(cfg.events_per_trip * static_cast<double>(n)));
    std::vector<EventKind> kinds = allocate_kinds(cfg.kind_weights, total_events);
    for (std::size_t i = kinds.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(unit(rng) * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(kinds[i - 1], kinds[j]);
    }

    const std::int64_t start_day =
        cfg.start_day != 0 ? cfg.start_day : days_from_civil(2024, 1, 1);
    // Slot budget: the longest possible trip (cruise, ramps, leads, start
    // jitter) plus a margin, so same-day trips can never overlap.
    const std::size_t max_share = kinds.empty() ? 0 : total_events / n + 1;
    const double slot_len_s =
        std::max(cfg.max_cruise_s, static_cast<double>(max_share * kSlotSamples +
                                                       kHoldGuard + 40) *
                                       cfg.sample_period_s) +
        40.0 * cfg.sample_period_s + kStartJitterS + 120.0;

    std::vector<TripSketch> sketches;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < n; ++i) {
        TripSketch sk;
        sk.original_index = i;
        sk.influenced = influenced[i];
        sk.cruise_s = cfg.min_cruise_s + (cfg.max_cruise_s - cfg.min_cruise_s) * unit(rng);
        sk.seed = splitmix64(cfg.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));

        const std::size_t share = total_events / n + (i < total_events % n ? 1 : 0);
        for (std::size_t e = 0; e < share && cursor < kinds.size(); ++e)
            sk.kinds.push_back(kinds[cursor++]);

        const std::int64_t day = start_day + static_cast<std::int64_t>(i % 14);
        const double slot = static_cast<double>(i / 14);
        const double base_hour = sk.influenced ? 22.0 : 7.0;
        const double hour = base_hour + slot * slot_len_s / 3600.0 +
                            kStartJitterS * unit(rng) / 3600.0;
        sk.start_ts = static_cast<double>(day) * 86400.0 + hour * 3600.0 -
                      cfg.tz_offset_hours * 3600.0;
        sketches.push_back(std::move(sk));
    }

    std::stable_sort(sketches.begin(), sketches.end(),
                     [](const TripSketch& a, const TripSketch& b) {
                         return a.start_ts < b.start_ts;
                     });

    for (std::size_t i = 0; i < sketches.size(); ++i) {
        TripBuild built = build_trip(sketches[i], cfg);
        built.manifest.index = i;
        corpus.samples.insert(corpus.samples.end(), built.samples.begin(),
                              built.samples.end());
        corpus.manifest.trips.push_back(std::move(built.manifest));
    }
    return corpus;
}

std::string manifest_to_json(const GroundTruthManifest& manifest) {
    nlohmann::json trips = nlohmann::json::array();
    for (const auto& t : manifest.trips) {
        nlohmann::json events = nlohmann::json::array();
        for (const auto& e : t.events)
            events.push_back({{"kind", to_string(e.kind)},
                              {"start_ts", e.start_ts},
                              {"end_ts", e.end_ts},
                              {"magnitude", e.magnitude}});
        trips.push_back({{"index", t.index},
                         {"start_ts", t.start_ts},
                         {"end_ts", t.end_ts},
                         {"influenced", t.influenced},
                         {"events", events}});
    }
    nlohmann::json j{{"version", 1}, {"driver_id", manifest.driver_id}, {"trips", trips}};
    return j.dump(2) + "\n";
}

GroundTruthManifest manifest_from_json(std::string_view bytes) {
    nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ValidationError("synth: manifest is not valid JSON");
    GroundTruthManifest m;
    try {
        m.driver_id = j.at("driver_id").get<std::string>();
        for (const auto& tj : j.at("trips")) {
            ManifestTrip t;
            t.index = tj.at("index").get<std::size_t>();
            t.start_ts = tj.at("start_ts").get<double>();
            t.end_ts = tj.at("end_ts").get<double>();
            t.influenced = tj.at("influenced").get<bool>();
            for (const auto& ej : tj.at("events")) {
                InjectedEvent e;
                e.kind = event_kind_from_string(ej.at("kind").get<std::string>());
                e.start_ts = ej.at("start_ts").get<double>();
                e.end_ts = ej.at("end_ts").get<double>();
                e.magnitude = ej.at("magnitude").get<double>();
                t.events.push_back(e);
            }
            m.trips.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("synth: manifest schema violation: ") + e.what());
    }
    return m;
}

} // namespace driveframe::synth
