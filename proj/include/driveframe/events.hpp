#pragma once

#include "driveframe/segmenter.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace driveframe {

enum class EventKind { HarshAcceleration, HarshBraking, Speeding, Swerving };

inline constexpr std::array<EventKind, 4> kAllEventKinds = {
    EventKind::HarshAcceleration, EventKind::HarshBraking,
    EventKind::Speeding, EventKind::Swerving};

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

enum class Severity { Low, Medium, High };

std::string_view to_string(Severity s);
Severity severity_from_string(std::string_view s);

// Speed-adaptive detection thresholds. The braking limit tightens with
// speed: brake_lo applies at or below v_lo, brake_hi at or above v_hi,
// linear in between.
struct ThresholdProfile {
    double brake_lo = 3.5;          // m/s^2 magnitude at low speed
    double brake_hi = 2.5;          // m/s^2 magnitude at high speed
    double v_lo = 11.11;            // m/s (40 km/h)
    double v_hi = 22.22;            // m/s (80 km/h)
    double accel_limit = 3.0;       // m/s^2
    double speed_limit = 13.89;     // m/s (50 km/h)
    double speed_margin = 0.05;     // fraction over the limit before flagging
    double speed_min_dur = 5.0;     // s a speeding run must be sustained
    double swerve_limit = 25.0;     // degrees/s
    double swerve_min_speed = 5.0;  // m/s; course is meaningless when parked
    double merge_window = 2.0;      // s between same-kind detections to merge

    void validate() const;
};

struct UnsafeEvent {
    std::string trip_id;
    EventKind kind;
    double start_ts = 0.0;
    double end_ts = 0.0;
    double peak_value = 0.0;            // extreme of the violated quantity
    double threshold_at_trigger = 0.0;  // same units, magnitude
    Severity severity = Severity::Low;
};

// Braking threshold magnitude at a given speed; monotonically
// non-increasing in speed.
double braking_threshold(double speed, const ThresholdProfile& profile);

// Severity bucket from |peak| / threshold. Ratio below 1 is out of domain.
Severity severity_for(double exceedance_ratio);

// Rule engine over one trip. Consecutive same-kind detections closer than
// merge_window collapse into a single event; output is sorted by start_ts.
std::vector<UnsafeEvent> detect_events(const Trip& trip, const ThresholdProfile& profile);

} // namespace driveframe
