#include "driveframe/segmenter.hpp"

#include "driveframe/errors.hpp"

#include <cstdio>

namespace driveframe {

void SegmenterConfig::validate() const {
    if (!(start_speed > stop_speed && stop_speed > 0.0))
        throw ValidationError("segmenter: require start_speed > stop_speed > 0");
    if (!(start_hold > 0.0 && stop_hold > 0.0))
        throw ValidationError("segmenter: hold durations must be positive");
}

std::optional<Boundary> step(SegmenterState& state, const KinematicSample& sample,
                             const SegmenterConfig& cfg) {
    const double ts = sample.base.ts;
    if (state.saw_sample && ts <= state.last_ts)
        throw ValidationError("segmenter: out-of-order sample rejected");

    const double speed = sample.base.speed;
    std::optional<Boundary> boundary;

    switch (state.phase) {
        case Phase::Idle:
            if (speed >= cfg.start_speed) {
                state.phase = Phase::PendingStart;
                state.pending_since = ts;
            }
            break;
        case Phase::PendingStart:
            if (speed < cfg.start_speed) {
                state.phase = Phase::Idle;
            } else if (ts - state.pending_since >= cfg.start_hold) {
                state.phase = Phase::Active;
                state.trip_start = state.pending_since;
                boundary = Boundary{Boundary::Kind::TripStarted, state.pending_since};
            }
            break;
        case Phase::Active:
            if (speed <= cfg.stop_speed) {
                state.phase = Phase::PendingStop;
                state.pending_since = ts;
            }
            break;
        case Phase::PendingStop:
            if (speed > cfg.stop_speed) {
                state.phase = Phase::Active;
            } else if (ts - state.pending_since >= cfg.stop_hold) {
                state.phase = Phase::Idle;
                boundary = Boundary{Boundary::Kind::TripEnded, state.pending_since};
            }
            break;
    }

    state.last_ts = ts;
    state.saw_sample = true;
    return boundary;
}

double trip_distance_km(const std::vector<KinematicSample>& samples) {
    double meters = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        double dt = samples[i].base.ts - samples[i - 1].base.ts;
        meters += 0.5 * (samples[i].base.speed + samples[i - 1].base.speed) * dt;
    }
    return meters / 1000.0;
}

std::vector<Trip> segment_trace(const std::vector<std::vector<KinematicSample>>& segments,
                                const SegmenterConfig& cfg, const std::string& id_prefix) {
    cfg.validate();
    std::vector<Trip> trips;

    auto next_id = [&] {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "-%05zu", trips.size());
        return id_prefix + buf;
    };

    auto close_trip = [&](double start_ts, double end_ts, std::vector<KinematicSample>&& buffer) {
        Trip t;
        t.trip_id = next_id();
        t.start_ts = start_ts;
        t.end_ts = end_ts;
        t.samples = std::move(buffer);
        t.distance_km = trip_distance_km(t.samples);
        trips.push_back(std::move(t));
    };

    for (const auto& segment : segments) {
        SegmenterState state;
        std::vector<KinematicSample> buffer;
        double cur_start = 0.0;

        for (const auto& sample : segment) {
            const Phase before = state.phase;
            const auto boundary = step(state, sample, cfg);

            if (boundary && boundary->kind == Boundary::Kind::TripStarted)
                cur_start = boundary->ts;

            if (boundary && boundary->kind == Boundary::Kind::TripEnded) {
                buffer.push_back(sample);
                close_trip(cur_start, sample.base.ts, std::move(buffer));
                buffer = {};
            } else if (state.phase != Phase::Idle) {
                if (before == Phase::Idle) buffer.clear();
                buffer.push_back(sample);
            } else if (before == Phase::PendingStart) {
                buffer.clear();  // false start
            }
        }

        // Force-close so an offline batch never orphans an open trip.
        if (state.phase == Phase::Active || state.phase == Phase::PendingStop) {
            close_trip(cur_start, state.last_ts, std::move(buffer));
            buffer = {};
        }
    }
    return trips;
}

} // namespace driveframe
