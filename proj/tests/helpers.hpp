#pragma once

#include "driveframe/segmenter.hpp"
#include "driveframe/telemetry.hpp"

#include <vector>

namespace testutil {

using driveframe::KinematicSample;
using driveframe::SensorSample;
using driveframe::Trip;

// A sample stream at 1 Hz from a speed profile; course constant.
inline std::vector<SensorSample> samples_from_speeds(const std::vector<double>& speeds,
                                                     double t0 = 0.0, double course = 90.0) {
    std::vector<SensorSample> out;
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        SensorSample s;
        s.ts = t0 + static_cast<double>(i);
        s.lat = 6.5;
        s.lon = 3.4;
        s.speed = speeds[i];
        s.course = course;
        s.az = 9.81;
        out.push_back(s);
    }
    return out;
}

inline Trip trip_from_speeds(const std::vector<double>& speeds, double t0 = 0.0,
                             double course = 90.0) {
    Trip t;
    t.trip_id = "test-trip";
    t.samples = driveframe::derive_kinematics(samples_from_speeds(speeds, t0, course));
    t.start_ts = t.samples.front().base.ts;
    t.end_ts = t.samples.back().base.ts;
    t.distance_km = driveframe::trip_distance_km(t.samples);
    return t;
}

} // namespace testutil
