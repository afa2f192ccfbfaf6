#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace driveframe {

// One timestamped telemetry reading. Device axes: x lateral, y longitudinal,
// z vertical. Data producers must align devices to this convention because
// the classifier consumes mean Y-axis acceleration.
struct SensorSample {
    double ts = 0.0;      // seconds since epoch, UTC, fractional allowed
    double lat = 0.0;     // degrees [-90, 90]
    double lon = 0.0;     // degrees [-180, 180]
    double speed = 0.0;   // m/s, >= 0
    double course = 0.0;  // degrees [0, 360)
    double ax = 0.0;      // m/s^2
    double ay = 0.0;      // m/s^2
    double az = 0.0;      // m/s^2

    bool operator==(const SensorSample&) const = default;
};

// Sample plus quantities derived by differencing against the previous sample
// of the same segment. Index 0 of a segment carries zeros.
struct KinematicSample {
    SensorSample base;
    double long_accel = 0.0;   // m/s^2, from speed differencing
    double course_rate = 0.0;  // degrees/s, shortest-arc course change rate

    bool operator==(const KinematicSample&) const = default;
};

enum class RejectReason {
    Malformed,
    OutOfRange,
    NonFinite,
    NonMonotonic,
};

std::string_view to_string(RejectReason r);

struct IngestReport {
    struct Gap {
        double ts = 0.0;       // timestamp of the first sample after the gap
        double seconds = 0.0;  // gap length
    };

    std::size_t accepted = 0;
    std::map<RejectReason, std::size_t> rejected_by_reason;
    std::vector<Gap> gaps;

    std::size_t rejected() const;
    void count(RejectReason r);
};

enum class LogFormat { Csv, Jsonl };

inline constexpr std::string_view kCsvHeader = "ts,lat,lon,speed,course,ax,ay,az";

// Accelerations are clamped, not dropped, so noise spikes are bounded
// without shifting event timing.
inline constexpr double kAccelClamp = 39.24;  // +/- 4g

inline constexpr double kDefaultMaxGap = 5.0;  // seconds

// Canonical number formatting for the csv interchange format: up to six
// fractional digits, '.' separator, trailing zeros trimmed.
std::string format_number(double v);

// Parse a raw log. Malformed or out-of-contract records are tallied, never
// fatal; an undecodable stream or a bad csv header is.
std::pair<std::vector<SensorSample>, IngestReport>
parse_log(std::string_view stream, LogFormat format);

// Drop non-monotonic timestamps (first of a tie wins), clamp accelerations,
// and split into contiguous segments wherever the inter-sample gap exceeds
// max_gap. Always succeeds.
std::pair<std::vector<std::vector<SensorSample>>, IngestReport>
clean_stream(const std::vector<SensorSample>& samples, double max_gap = kDefaultMaxGap);

// Difference quotients over a strictly increasing segment.
std::vector<KinematicSample> derive_kinematics(const std::vector<SensorSample>& segment);

// Serializers for the two interchange formats.
std::string to_csv(const std::vector<SensorSample>& samples);
std::string to_jsonl(const std::vector<SensorSample>& samples);
std::string sample_to_csv_line(const SensorSample& s);

} // namespace driveframe
