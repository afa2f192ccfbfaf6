#pragma once

#include "driveframe/events.hpp"
#include "driveframe/telemetry.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace driveframe::synth {

// Scenario knobs. Defaults keep clean stretches strictly inside the
// detector thresholds and push injected events past them by a margin, so
// the manifest is the exact ground truth for what detection should find.
struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::size_t trip_count = 20;
    std::string driver_id = "driver-1";

    double min_cruise_s = 240.0;
    double max_cruise_s = 480.0;
    double sample_period_s = 1.0;

    double events_per_trip = 4.0;  // 0 disables injection entirely
    // Relative injected-kind weights; defaults follow the field
    // distribution observed in the pilot data.
    std::map<EventKind, double> kind_weights = {
        {EventKind::HarshAcceleration, 46.1},
        {EventKind::Speeding, 29.5},
        {EventKind::HarshBraking, 18.3},
        {EventKind::Swerving, 6.1},
    };

    double speed_noise = 0.12;   // m/s, truncated at 4 sigma
    double course_noise = 0.8;   // degrees

    double influenced_fraction = 0.0;
    double influenced_speed_wander = 3.0;    // m/s sinusoid amplitude
    double influenced_course_wander = 30.0;  // degrees sinusoid amplitude

    double tz_offset_hours = 1.0;
    std::int64_t start_day = 0;  // local day of the first Monday; 0 = default

    ThresholdProfile thresholds;  // the limits the generator respects
};

struct InjectedEvent {
    EventKind kind;
    double start_ts = 0.0;
    double end_ts = 0.0;
    double magnitude = 0.0;  // peak of the violated quantity
};

struct ManifestTrip {
    std::size_t index = 0;
    double start_ts = 0.0;  // first sample of the trace segment
    double end_ts = 0.0;    // last sample
    bool influenced = false;
    std::vector<InjectedEvent> events;
};

struct GroundTruthManifest {
    std::string driver_id;
    std::vector<ManifestTrip> trips;

    std::size_t total_events() const;
    std::map<EventKind, std::size_t> events_by_kind() const;
};

struct Corpus {
    std::vector<SensorSample> samples;  // globally time-ordered
    GroundTruthManifest manifest;
};

// Deterministic for a fixed seed; trips draw from per-trip derived seeds.
Corpus generate_corpus(const ScenarioConfig& cfg);

std::string manifest_to_json(const GroundTruthManifest& manifest);
GroundTruthManifest manifest_from_json(std::string_view bytes);

} // namespace driveframe::synth
