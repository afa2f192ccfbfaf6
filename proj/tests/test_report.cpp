#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "driveframe/report.hpp"
#include "driveframe/textscan.hpp"
#include "driveframe/timeutil.hpp"

#include "helpers.hpp"

#include <cstdlib>
#include <set>

using namespace driveframe;

namespace {

// 2024-01-01 was a Monday.
const std::int64_t kMonday = days_from_civil(2024, 1, 1);

Trip trip_at(double local_day_offset_s, double distance_km, const std::string& id,
             double tz = 0.0) {
    Trip t;
    t.trip_id = id;
    t.start_ts = static_cast<double>(kMonday) * 86400.0 + local_day_offset_s - tz * 3600.0;
    t.end_ts = t.start_ts + 600.0;
    t.distance_km = distance_km;
    t.samples = derive_kinematics(
        testutil::samples_from_speeds(std::vector<double>(5, 10.0), t.start_ts));
    return t;
}

UnsafeEvent event_for(const std::string& trip_id, EventKind kind, double ts) {
    UnsafeEvent e;
    e.trip_id = trip_id;
    e.kind = kind;
    e.start_ts = ts;
    e.end_ts = ts + 1.0;
    e.peak_value = 5.0;
    e.threshold_at_trigger = 3.0;
    e.severity = Severity::Medium;
    return e;
}

WeeklyStats sample_stats() {
    WeeklyStats s;
    s.driver_id = "d1";
    s.week_start_day = kMonday;
    s.trips = 4;
    s.distance_km = 50.0;
    for (EventKind k : kAllEventKinds) s.events_by_kind[k] = 0;
    s.events_by_kind[EventKind::Speeding] = 3;
    s.events_by_kind[EventKind::HarshAcceleration] = 2;
    for (EventKind k : kAllEventKinds)
        s.events_per_100km[k] =
            static_cast<double>(s.events_by_kind[k]) * 100.0 / s.distance_km;
    return s;
}

} // namespace

TEST_CASE("aggregate_week: empty week") {
    auto stats = aggregate_week({}, {}, {}, "d1", kMonday, 0.0);
    CHECK(stats.trips == 0);
    CHECK(stats.distance_km == 0.0);
    CHECK(stats.events_per_100km.empty());
    CHECK(stats.total_events() == 0);
    CHECK(!stats.deltas_vs_prev_week);
}

TEST_CASE("aggregate_week rejects a non-Monday start") {
    CHECK_THROWS_AS(aggregate_week({}, {}, {}, "d1", kMonday + 1, 0.0), ValidationError);
}

TEST_CASE("aggregate_week: rates and influenced counts") {
    std::vector<Trip> trips = {trip_at(3600.0, 20.0, "t1"), trip_at(90000.0, 30.0, "t2")};
    std::vector<UnsafeEvent> events = {
        event_for("t1", EventKind::Speeding, trips[0].start_ts + 10),
        event_for("t1", EventKind::Speeding, trips[0].start_ts + 60),
        event_for("t2", EventKind::Speeding, trips[1].start_ts + 10)};
    std::vector<TripClassification> cls = {{"t1", Label::Influenced},
                                           {"t2", Label::Sober}};
    auto stats = aggregate_week(trips, events, cls, "d1", kMonday, 0.0);
    CHECK(stats.trips == 2);
    CHECK(stats.distance_km == doctest::Approx(50.0));
    CHECK(stats.events_by_kind.at(EventKind::Speeding) == 3);
    CHECK(stats.events_per_100km.at(EventKind::Speeding) == doctest::Approx(6.0));
    CHECK(stats.influenced_trips == 1);
}

TEST_CASE("a trip at 23:59 Sunday belongs to the preceding week") {
    const double sunday_2359 = 6.0 * 86400.0 + 23.0 * 3600.0 + 59.0 * 60.0;
    std::vector<Trip> trips = {trip_at(sunday_2359, 10.0, "t1")};
    auto this_week = aggregate_week(trips, {}, {}, "d1", kMonday, 0.0);
    auto next_week = aggregate_week(trips, {}, {}, "d1", kMonday + 7, 0.0);
    CHECK(this_week.trips == 1);
    CHECK(next_week.trips == 0);
}

TEST_CASE("deltas appear once the previous week has trips") {
    std::vector<Trip> trips = {trip_at(3600.0, 20.0, "t1"),
                               trip_at(7.0 * 86400.0 + 3600.0, 20.0, "t2")};
    std::vector<UnsafeEvent> events = {
        event_for("t1", EventKind::HarshBraking, trips[0].start_ts + 5),
        event_for("t1", EventKind::HarshBraking, trips[0].start_ts + 50),
        event_for("t2", EventKind::HarshBraking, trips[1].start_ts + 5)};
    auto week2 = aggregate_week(trips, events, {}, "d1", kMonday + 7, 0.0);
    REQUIRE(week2.deltas_vs_prev_week.has_value());
    CHECK(week2.deltas_vs_prev_week->at(EventKind::HarshBraking) == -1);
}

TEST_CASE("plan_report: all-zero stats get one maintenance bullet per list") {
    WeeklyStats zero;
    zero.driver_id = "d1";
    zero.week_start_day = kMonday;
    for (EventKind k : kAllEventKinds) zero.events_by_kind[k] = 0;
    auto plan = plan_report(zero);
    CHECK(plan.attitude_points.size() == 1);
    CHECK(plan.norm_points.size() == 1);
    CHECK(plan.control_points.size() == 1);
}

TEST_CASE("plan_report: top-2 kinds get exactly two technique bullets") {
    auto stats = sample_stats();
    auto plan = plan_report(stats);
    CHECK(plan.control_points.size() == 2);
    CHECK(!plan.attitude_points.empty());
    CHECK(!plan.norm_points.empty());
}

TEST_CASE("every numeral in the plan is a stats value") {
    auto stats = sample_stats();
    stats.deltas_vs_prev_week = std::map<EventKind, long long>{
        {EventKind::HarshAcceleration, -2},
        {EventKind::HarshBraking, 0},
        {EventKind::Speeding, 1},
        {EventKind::Swerving, 0}};
    auto plan = plan_report(stats);
    for (const auto& list : {plan.attitude_points, plan.norm_points, plan.control_points})
        for (const auto& bullet : list)
            CHECK(check_consistency(bullet, stats).empty());
}

TEST_CASE("check_consistency examples") {
    auto stats = sample_stats();
    SUBCASE("exact match passes") {
        CHECK(check_consistency("You completed 4 trips", stats).empty());
    }
    SUBCASE("wrong count is flagged") {
        auto v = check_consistency("12 speeding events", stats);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == Violation::Kind::Numeral);
        CHECK(v[0].token == "12");
    }
    SUBCASE("banned phrase is flagged") {
        auto v = check_consistency("That was reckless driving", stats);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == Violation::Kind::Tone);
        CHECK(v[0].token == "reckless");
    }
    SUBCASE("per-100km unit text does not read as a numeral") {
        CHECK(check_consistency("Your rate was 6.0 per 100 km this week", stats).empty());
    }
    SUBCASE("one-decimal distance matches") {
        auto s = stats;
        s.distance_km = 52.34;
        CHECK(check_consistency("You covered 52.3 km", s).empty());
        CHECK(check_consistency("You covered 53.3 km", s).size() == 1);
    }
}

TEST_CASE("render_template_report: deterministic, sectioned, consistent") {
    auto stats = sample_stats();
    auto plan = plan_report(stats);
    auto a = render_template_report(plan);
    auto b = render_template_report(plan);
    CHECK(a == b);
    CHECK(a.find(std::string(kAttitudeHeader)) != std::string::npos);
    CHECK(a.find(std::string(kNormHeader)) != std::string::npos);
    CHECK(a.find(std::string(kControlHeader)) != std::string::npos);
    CHECK(check_consistency(a, stats).empty());
}

TEST_CASE("generate_report with the deterministic stub") {
    auto stats = sample_stats();
    StubBackend backend;
    auto report = generate_report(backend, ReportModelSpec{}, stats);
    CHECK(report.provenance == Provenance::TwoStep);
    CHECK(!report.degraded);
    CHECK(check_consistency(report.text, stats).empty());
    CHECK(report.violations_fixed == 0);
}

TEST_CASE("an adversarial backend that always inflates numerals forces fallback") {
    auto stats = sample_stats();
    AdversarialBackend::Corruption c;
    c.numeral_prob = 1.0;
    c.seed = 4;
    AdversarialBackend backend(c);
    auto report = generate_report(backend, ReportModelSpec{}, stats);
    CHECK(report.provenance == Provenance::Fallback);
    CHECK(check_consistency(report.text, stats).empty());
    CHECK(report.text == render_template_report(plan_report(stats)));
}

TEST_CASE("empty stats go straight to the template path") {
    WeeklyStats zero;
    zero.driver_id = "d1";
    zero.week_start_day = kMonday;
    for (EventKind k : kAllEventKinds) zero.events_by_kind[k] = 0;
    NullBackend backend;  // would throw if it were consulted
    auto report = generate_report(backend, ReportModelSpec{}, zero);
    CHECK(report.provenance == Provenance::Fallback);
    CHECK(!report.degraded);
    CHECK(check_consistency(report.text, zero).empty());
}

TEST_CASE("backend failure yields a degraded fallback report, never nothing") {
    auto stats = sample_stats();
    NullBackend backend;
    auto report = generate_report(backend, ReportModelSpec{}, stats);
    CHECK(report.provenance == Provenance::Fallback);
    CHECK(report.degraded);
    CHECK(!report.text.empty());
    CHECK(check_consistency(report.text, stats).empty());
}

TEST_CASE("prompt hygiene: every prompt numeral is a stats value") {
    auto stats = sample_stats();
    stats.deltas_vs_prev_week = std::map<EventKind, long long>{
        {EventKind::HarshAcceleration, -1},
        {EventKind::HarshBraking, 2},
        {EventKind::Speeding, 0},
        {EventKind::Swerving, 0}};
    auto plan = plan_report(stats);
    const std::string draft_prompt = build_draft_prompt(stats, plan);
    const std::string refine_prompt =
        build_refine_prompt(render_template_report(plan), stats, false);
    const std::string corrective_prompt =
        build_refine_prompt(render_template_report(plan), stats, true);
    for (const std::string& prompt : {draft_prompt, refine_prompt, corrective_prompt})
        CHECK(check_consistency(prompt, stats).empty());
    CHECK(draft_prompt.rfind("report-draft/v1", 0) == 0);
    CHECK(refine_prompt.rfind("report-refine/v1", 0) == 0);
}
