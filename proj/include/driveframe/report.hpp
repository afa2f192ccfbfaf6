#pragma once

#include "driveframe/backend.hpp"
#include "driveframe/events.hpp"
#include "driveframe/features.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace driveframe {

struct TripClassification {
    std::string trip_id;
    Label label = Label::Sober;
};

// Aggregated per-driver statistics for one local week (Monday-based).
struct WeeklyStats {
    std::string driver_id;
    std::int64_t week_start_day = 0;  // local day number, always a Monday
    std::size_t trips = 0;
    double distance_km = 0.0;
    std::map<EventKind, std::size_t> events_by_kind;  // all four kinds present
    std::map<EventKind, double> events_per_100km;     // empty when distance is 0
    std::size_t influenced_trips = 0;
    // Signed per-kind count differences vs the previous week; absent when
    // the previous week holds no trips.
    std::optional<std::map<EventKind, long long>> deltas_vs_prev_week;

    std::size_t total_events() const;
};

// Content bullets grouped by the three levers of planned behaviour:
// attitudes, social norms, perceived control.
struct ReportPlan {
    std::vector<std::string> attitude_points;
    std::vector<std::string> norm_points;
    std::vector<std::string> control_points;
};

enum class Provenance { TwoStep, Fallback };

struct FinalReport {
    std::string text;
    std::int64_t week_start_day = 0;
    std::string driver_id;
    Provenance provenance = Provenance::Fallback;
    std::size_t violations_fixed = 0;
    bool degraded = false;  // the backend itself failed
};

struct Violation {
    enum class Kind { Numeral, Tone } kind;
    std::string token;  // offending numeral or phrase
};

struct ReportConfig {
    // Reference rates (events per 100 km) used for the social-norm
    // comparisons; this artifact has no fleet backend to compute them from.
    std::map<EventKind, double> peer_rates = {
        {EventKind::HarshAcceleration, 30.0},
        {EventKind::HarshBraking, 12.0},
        {EventKind::Speeding, 20.0},
        {EventKind::Swerving, 4.0},
    };
    std::vector<std::string> banned_phrases = {"reckless", "you failed",
                                               "dangerous driver"};
};

struct ReportModelSpec {
    std::string draft_model_id = "draft-strong";
    std::string refine_model_id = "refine-fast";
};

// Section headers of the rendered report; fixed so tests and the stub
// backend can recognize them.
inline constexpr std::string_view kAttitudeHeader = "== Your week on the road ==";
inline constexpr std::string_view kNormHeader = "== How you compare ==";
inline constexpr std::string_view kControlHeader = "== What you can control ==";

// Only trips starting inside [week_start_day, +7d) local time are counted;
// the previous week is aggregated from the same inputs for the deltas.
WeeklyStats aggregate_week(const std::vector<Trip>& trips,
                           const std::vector<UnsafeEvent>& events,
                           const std::vector<TripClassification>& classifications,
                           const std::string& driver_id, std::int64_t week_start_day,
                           double tz_offset_hours);

ReportPlan plan_report(const WeeklyStats& stats, const ReportConfig& cfg = {});

// Every numeric token must be derivable from the stats (counts, distance,
// rates and deltas, with km and per-100km values compared at one decimal),
// and none of the banned blame phrases may appear.
std::vector<Violation> check_consistency(std::string_view text, const WeeklyStats& stats,
                                         const std::vector<std::string>& banned_phrases =
                                             ReportConfig{}.banned_phrases);

// Deterministic three-section rendering of a plan; passes check_consistency
// by construction.
std::string render_template_report(const ReportPlan& plan);

std::string build_draft_prompt(const WeeklyStats& stats, const ReportPlan& plan);
std::string build_refine_prompt(const std::string& draft, const WeeklyStats& stats,
                                bool corrective);

// Two-step reflection: draft with the strong model, revise with the fast
// one, audit numerals, retry once, then fall back to the template. Never
// returns an inconsistent or absent report.
FinalReport generate_report(GenerationBackend& backend, const ReportModelSpec& spec,
                            const WeeklyStats& stats, const ReportConfig& cfg = {});

} // namespace driveframe
