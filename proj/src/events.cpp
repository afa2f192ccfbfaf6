#include "driveframe/events.hpp"

#include "driveframe/errors.hpp"

#include <algorithm>
#include <cmath>

namespace driveframe {

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::HarshAcceleration: return "HarshAcceleration";
        case EventKind::HarshBraking: return "HarshBraking";
        case EventKind::Speeding: return "Speeding";
        case EventKind::Swerving: return "Swerving";
    }
    return "unknown";
}

EventKind event_kind_from_string(std::string_view s) {
    for (EventKind k : kAllEventKinds)
        if (to_string(k) == s) return k;
    throw ValidationError("events: unknown event kind '" + std::string(s) + "'");
}

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::Low: return "Low";
        case Severity::Medium: return "Medium";
        case Severity::High: return "High";
    }
    return "unknown";
}

Severity severity_from_string(std::string_view s) {
    if (s == "Low") return Severity::Low;
    if (s == "Medium") return Severity::Medium;
    if (s == "High") return Severity::High;
    throw ValidationError("events: unknown severity '" + std::string(s) + "'");
}

void ThresholdProfile::validate() const {
    if (!(brake_lo > brake_hi && brake_hi > 0.0))
        throw ValidationError("events: require brake_lo > brake_hi > 0");
    if (!(v_lo < v_hi))
        throw ValidationError("events: require v_lo < v_hi");
    const double limits[] = {accel_limit, speed_limit, speed_min_dur,
                             swerve_limit, swerve_min_speed, merge_window};
    for (double l : limits)
        if (!(l > 0.0)) throw ValidationError("events: limits must be positive");
    if (speed_margin < 0.0)
        throw ValidationError("events: speed_margin must be non-negative");
}

double braking_threshold(double speed, const ThresholdProfile& p) {
    if (speed <= p.v_lo) return p.brake_lo;
    if (speed >= p.v_hi) return p.brake_hi;
    double t = (speed - p.v_lo) / (p.v_hi - p.v_lo);
    return p.brake_lo + t * (p.brake_hi - p.brake_lo);
}

Severity severity_for(double exceedance_ratio) {
    if (!(exceedance_ratio >= 1.0))
        throw ValidationError("events: exceedance ratio below 1 is out of domain");
    if (exceedance_ratio < 1.25) return Severity::Low;
    if (exceedance_ratio < 1.5) return Severity::Medium;
    return Severity::High;
}

namespace {

// A raw per-sample (or per-run, for speeding) detection before merging.
struct Detection {
    double start_ts;
    double end_ts;
    std::size_t first_idx;  // sample index where the threshold was crossed
    std::size_t last_idx;
};

std::vector<UnsafeEvent> merge_detections(const Trip& trip, EventKind kind,
                                          std::vector<Detection> dets,
                                          const ThresholdProfile& p) {
    std::vector<UnsafeEvent> events;
    std::size_t i = 0;
    while (i < dets.size()) {
        Detection span = dets[i];
        std::size_t j = i + 1;
        while (j < dets.size() && dets[j].start_ts - span.end_ts <= p.merge_window) {
            span.end_ts = dets[j].end_ts;
            span.last_idx = dets[j].last_idx;
            ++j;
        }
        i = j;

        UnsafeEvent ev;
        ev.trip_id = trip.trip_id;
        ev.kind = kind;
        ev.start_ts = span.start_ts;
        ev.end_ts = span.end_ts;

        const auto& samples = trip.samples;
        double peak = 0.0;
        for (std::size_t s = span.first_idx; s <= span.last_idx; ++s) {
            double v = 0.0;
            switch (kind) {
                case EventKind::HarshAcceleration: v = samples[s].long_accel; break;
                case EventKind::HarshBraking: v = samples[s].long_accel; break;
                case EventKind::Speeding: v = samples[s].base.speed; break;
                case EventKind::Swerving: v = samples[s].course_rate; break;
            }
            if (s == span.first_idx || std::fabs(v) > std::fabs(peak)) peak = v;
        }
        ev.peak_value = peak;

        switch (kind) {
            case EventKind::HarshAcceleration:
                ev.threshold_at_trigger = p.accel_limit;
                break;
            case EventKind::HarshBraking:
                ev.threshold_at_trigger = braking_threshold(
                    samples[span.first_idx > 0 ? span.first_idx - 1 : 0].base.speed, p);
                break;
            case EventKind::Speeding:
                ev.threshold_at_trigger = p.speed_limit * (1.0 + p.speed_margin);
                break;
            case EventKind::Swerving:
                ev.threshold_at_trigger = p.swerve_limit;
                break;
        }
        ev.severity = severity_for(std::fabs(ev.peak_value) / ev.threshold_at_trigger);
        events.push_back(std::move(ev));
    }
    return events;
}

} // namespace

std::vector<UnsafeEvent> detect_events(const Trip& trip, const ThresholdProfile& p) {
    p.validate();
    const auto& samples = trip.samples;

    std::vector<Detection> braking, accel, swerve, speeding;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& k = samples[i];
        const double ts = k.base.ts;
        // long_accel[i] spans the interval arriving at sample i, so the
        // braking rule is judged at the speed the manoeuvre started from.
        const double onset_speed = i > 0 ? samples[i - 1].base.speed : k.base.speed;
        if (k.long_accel < -braking_threshold(onset_speed, p))
            braking.push_back({ts, ts, i, i});
        if (k.long_accel > p.accel_limit)
            accel.push_back({ts, ts, i, i});
        if (std::fabs(k.course_rate) > p.swerve_limit && k.base.speed >= p.swerve_min_speed)
            swerve.push_back({ts, ts, i, i});
    }

    // Speeding triggers only when sustained for speed_min_dur.
    const double speed_threshold = p.speed_limit * (1.0 + p.speed_margin);
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t i = 0; i <= samples.size(); ++i) {
        bool over = i < samples.size() && samples[i].base.speed > speed_threshold;
        if (over && !in_run) {
            run_start = i;
            in_run = true;
        } else if (!over && in_run) {
            in_run = false;
            std::size_t run_end = i - 1;
            if (samples[run_end].base.ts - samples[run_start].base.ts >= p.speed_min_dur)
                speeding.push_back({samples[run_start].base.ts, samples[run_end].base.ts,
                                    run_start, run_end});
        }
    }

    std::vector<UnsafeEvent> events;
    auto append = [&](EventKind kind, std::vector<Detection>&& dets) {
        auto merged = merge_detections(trip, kind, std::move(dets), p);
        events.insert(events.end(), merged.begin(), merged.end());
    };
    append(EventKind::HarshAcceleration, std::move(accel));
    append(EventKind::HarshBraking, std::move(braking));
    append(EventKind::Speeding, std::move(speeding));
    append(EventKind::Swerving, std::move(swerve));

    std::stable_sort(events.begin(), events.end(),
                     [](const UnsafeEvent& a, const UnsafeEvent& b) {
                         if (a.start_ts != b.start_ts) return a.start_ts < b.start_ts;
                         return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                     });
    return events;
}

} // namespace driveframe
