#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "driveframe/events.hpp"
#include "driveframe/features.hpp"
#include "driveframe/segmenter.hpp"
#include "driveframe/smote.hpp"
#include "driveframe/synth.hpp"
#include "driveframe/telemetry.hpp"

#include <cmath>
#include <map>

using namespace driveframe;

namespace {

// Full pipeline front end: raw samples to trips.
std::vector<Trip> pipeline_trips(const std::vector<SensorSample>& samples) {
    auto [segments, report] = clean_stream(samples, kDefaultMaxGap);
    std::vector<std::vector<KinematicSample>> kin;
    for (const auto& s : segments) kin.push_back(derive_kinematics(s));
    return segment_trace(kin, SegmenterConfig{});
}

// Independent per-sample scan for threshold violations; no merging, no run
// logic. Used to confirm each manifest event really is present in the raw
// trace and each detected event corresponds to a manifest entry.
bool violation_in_window(const std::vector<KinematicSample>& samples, EventKind kind,
                         double t0, double t1, const ThresholdProfile& p) {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto& k = samples[i];
        if (k.base.ts < t0 - 1.5 || k.base.ts > t1 + 1.5) continue;
        switch (kind) {
            case EventKind::HarshBraking:
                if (k.long_accel < -braking_threshold(samples[i - 1].base.speed, p))
                    return true;
                break;
            case EventKind::HarshAcceleration:
                if (k.long_accel > p.accel_limit) return true;
                break;
            case EventKind::Speeding:
                if (k.base.speed > p.speed_limit * (1.0 + p.speed_margin)) return true;
                break;
            case EventKind::Swerving:
                if (std::fabs(k.course_rate) > p.swerve_limit &&
                    k.base.speed >= p.swerve_min_speed)
                    return true;
                break;
        }
    }
    return false;
}

} // namespace

TEST_CASE("generation is deterministic for a fixed seed") {
    synth::ScenarioConfig cfg;
    cfg.seed = 42;
    cfg.trip_count = 6;
    auto a = synth::generate_corpus(cfg);
    auto b = synth::generate_corpus(cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(a.samples == b.samples);
    CHECK(to_csv(a.samples) == to_csv(b.samples));
    CHECK(synth::manifest_to_json(a.manifest) == synth::manifest_to_json(b.manifest));

    cfg.seed = 43;
    auto c = synth::generate_corpus(cfg);
    CHECK(a.samples != c.samples);
}

TEST_CASE("zero event rate produces a violation-free corpus") {
    synth::ScenarioConfig cfg;
    cfg.seed = 7;
    cfg.trip_count = 8;
    cfg.events_per_trip = 0.0;
    cfg.influenced_fraction = 0.5;
    auto corpus = synth::generate_corpus(cfg);
    CHECK(corpus.manifest.total_events() == 0);

    auto trips = pipeline_trips(corpus.samples);
    CHECK(trips.size() == cfg.trip_count);
    for (const auto& t : trips) CHECK(detect_events(t, cfg.thresholds).empty());
}

TEST_CASE("injected kind proportions match the configured weights within a point") {
    synth::ScenarioConfig cfg;
    cfg.seed = 11;
    cfg.trip_count = 250;
    cfg.events_per_trip = 8.0;
    auto corpus = synth::generate_corpus(cfg);
    const auto total = corpus.manifest.total_events();
    REQUIRE(total >= 2000);
    auto by_kind = corpus.manifest.events_by_kind();
    const std::map<EventKind, double> expect = {{EventKind::HarshAcceleration, 46.1},
                                                {EventKind::Speeding, 29.5},
                                                {EventKind::HarshBraking, 18.3},
                                                {EventKind::Swerving, 6.1}};
    for (const auto& [kind, pct] : expect) {
        const double got = 100.0 * static_cast<double>(by_kind.at(kind)) /
                           static_cast<double>(total);
        CHECK(std::fabs(got - pct) <= 1.0);
    }
}

TEST_CASE("manifest events are recoverable by an independent threshold scan") {
    synth::ScenarioConfig cfg;
    cfg.seed = 5;
    cfg.trip_count = 30;
    cfg.events_per_trip = 5.0;
    cfg.influenced_fraction = 0.3;
    auto corpus = synth::generate_corpus(cfg);

    auto [segments, report] = clean_stream(corpus.samples, kDefaultMaxGap);
    REQUIRE(segments.size() == corpus.manifest.trips.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
        auto kin = derive_kinematics(segments[i]);
        for (const auto& e : corpus.manifest.trips[i].events) {
            CHECK(violation_in_window(kin, e.kind, e.start_ts, e.end_ts, cfg.thresholds));
            CHECK(e.start_ts >= corpus.manifest.trips[i].start_ts);
            CHECK(e.end_ts <= corpus.manifest.trips[i].end_ts);
        }
    }
}

TEST_CASE("manifest json round-trips") {
    synth::ScenarioConfig cfg;
    cfg.seed = 3;
    cfg.trip_count = 4;
    cfg.influenced_fraction = 0.5;
    auto corpus = synth::generate_corpus(cfg);
    auto json = synth::manifest_to_json(corpus.manifest);
    auto back = synth::manifest_from_json(json);
    CHECK(synth::manifest_to_json(back) == json);
}

TEST_CASE("influenced signature separates by nearest centroid") {
    synth::ScenarioConfig cfg;
    cfg.seed = 17;
    cfg.trip_count = 60;
    cfg.events_per_trip = 3.0;
    cfg.influenced_fraction = 0.4;
    auto corpus = synth::generate_corpus(cfg);

    auto trips = pipeline_trips(corpus.samples);
    REQUIRE(trips.size() == corpus.manifest.trips.size());

    LabeledDataset data;
    for (std::size_t i = 0; i < trips.size(); ++i)
        data.rows.emplace_back(extract_features(trips[i], cfg.tz_offset_hours),
                               corpus.manifest.trips[i].influenced ? Label::Influenced
                                                                   : Label::Sober);

    // nearest-centroid in standardized feature space
    const auto st = Standardization::fit(data);
    TripFeatures cent[2]{};
    std::size_t counts[2]{};
    auto accumulate = [&](const TripFeatures& f, int cls) {
        auto a = cent[cls].as_array();
        auto v = f.as_array();
        for (std::size_t k = 0; k < kFeatureCount; ++k) a[k] += v[k];
        cent[cls] = TripFeatures::from_array(a);
        ++counts[cls];
    };
    for (const auto& [f, l] : data.rows) accumulate(f, l == Label::Influenced ? 1 : 0);
    for (int c = 0; c < 2; ++c) {
        auto a = cent[c].as_array();
        for (auto& v : a) v /= static_cast<double>(counts[c]);
        cent[c] = TripFeatures::from_array(a);
    }

    std::size_t influenced_total = 0, influenced_hit = 0;
    for (const auto& [f, l] : data.rows) {
        const int predicted =
            feature_distance(f, cent[1], st) < feature_distance(f, cent[0], st) ? 1 : 0;
        if (l == Label::Influenced) {
            ++influenced_total;
            if (predicted == 1) ++influenced_hit;
        }
    }
    REQUIRE(influenced_total > 0);
    const double recall = static_cast<double>(influenced_hit) /
                          static_cast<double>(influenced_total);
    CHECK(recall >= 0.95);
}

TEST_CASE("empty scenario produces an empty corpus") {
    synth::ScenarioConfig cfg;
    cfg.trip_count = 0;
    auto corpus = synth::generate_corpus(cfg);
    CHECK(corpus.samples.empty());
    CHECK(corpus.manifest.trips.empty());
}
