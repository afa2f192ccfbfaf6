#pragma once

#include "driveframe/telemetry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace driveframe {

// Debounce windows. Defaults are sized so ordinary traffic stops
// (under three minutes) do not split a trip.
struct SegmenterConfig {
    double start_speed = 3.0;   // m/s
    double start_hold = 30.0;   // s
    double stop_speed = 1.0;    // m/s
    double stop_hold = 180.0;   // s

    void validate() const;
};

enum class Phase { Idle, PendingStart, Active, PendingStop };

struct SegmenterState {
    Phase phase = Phase::Idle;
    double pending_since = 0.0;  // valid in PendingStart / PendingStop
    double trip_start = 0.0;     // valid in Active / PendingStop
    double last_ts = 0.0;
    bool saw_sample = false;
};

struct Boundary {
    enum class Kind { TripStarted, TripEnded } kind;
    double ts;  // pending-since timestamp of the matured window
};

struct Trip {
    std::string trip_id;
    double start_ts = 0.0;
    double end_ts = 0.0;
    std::vector<KinematicSample> samples;
    double distance_km = 0.0;  // trapezoidal integral of speed

    bool operator==(const Trip&) const = default;
};

// Single debounced transition. Samples must arrive in strictly increasing
// timestamp order; an out-of-order sample throws and leaves state unchanged.
std::optional<Boundary> step(SegmenterState& state, const KinematicSample& sample,
                             const SegmenterConfig& cfg);

// Batch segmentation over cleaned segments. Each segment runs its own
// machine from Idle; an open trip at end-of-segment is force-closed at the
// last sample so offline batches never orphan data. Trip ids are
// "<prefix>-NNNNN" in emission order.
std::vector<Trip> segment_trace(const std::vector<std::vector<KinematicSample>>& segments,
                                const SegmenterConfig& cfg,
                                const std::string& id_prefix = "trip");

double trip_distance_km(const std::vector<KinematicSample>& samples);

} // namespace driveframe
