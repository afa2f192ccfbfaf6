#include "driveframe/serialize.hpp"

#include "driveframe/errors.hpp"
#include "driveframe/tree.hpp"

#include <json.hpp>

namespace driveframe {

namespace {

nlohmann::json sample_to_json(const KinematicSample& k) {
    return {{"ts", k.base.ts},   {"lat", k.base.lat},     {"lon", k.base.lon},
            {"speed", k.base.speed}, {"course", k.base.course}, {"ax", k.base.ax},
            {"ay", k.base.ay},   {"az", k.base.az},       {"la", k.long_accel},
            {"cr", k.course_rate}};
}

KinematicSample sample_from_json(const nlohmann::json& j) {
    KinematicSample k;
    k.base.ts = j.at("ts").get<double>();
    k.base.lat = j.at("lat").get<double>();
    k.base.lon = j.at("lon").get<double>();
    k.base.speed = j.at("speed").get<double>();
    k.base.course = j.at("course").get<double>();
    k.base.ax = j.at("ax").get<double>();
    k.base.ay = j.at("ay").get<double>();
    k.base.az = j.at("az").get<double>();
    k.long_accel = j.at("la").get<double>();
    k.course_rate = j.at("cr").get<double>();
    return k;
}

nlohmann::json parse_or_throw(std::string_view bytes, const char* what) {
    nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ValidationError(std::string("serialize: invalid ") + what + " payload");
    return j;
}

} // namespace

std::string trip_to_json(const Trip& trip) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& k : trip.samples) samples.push_back(sample_to_json(k));
    nlohmann::json j{{"trip_id", trip.trip_id},
                     {"start_ts", trip.start_ts},
                     {"end_ts", trip.end_ts},
                     {"distance_km", trip.distance_km},
                     {"samples", samples}};
    return j.dump();
}

Trip trip_from_json(std::string_view bytes) {
    nlohmann::json j = parse_or_throw(bytes, "trip");
    try {
        Trip t;
        t.trip_id = j.at("trip_id").get<std::string>();
        t.start_ts = j.at("start_ts").get<double>();
        t.end_ts = j.at("end_ts").get<double>();
        t.distance_km = j.at("distance_km").get<double>();
        for (const auto& sj : j.at("samples")) t.samples.push_back(sample_from_json(sj));
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("serialize: trip schema violation: ") + e.what());
    }
}

std::string trip_meta_to_jsonl(const Trip& trip) {
    nlohmann::json j{{"trip_id", trip.trip_id},
                     {"start_ts", trip.start_ts},
                     {"end_ts", trip.end_ts},
                     {"distance_km", trip.distance_km},
                     {"sample_count", trip.samples.size()}};
    return j.dump();
}

std::string event_to_json(const UnsafeEvent& event) {
    nlohmann::json j{{"trip_id", event.trip_id},
                     {"kind", to_string(event.kind)},
                     {"start_ts", event.start_ts},
                     {"end_ts", event.end_ts},
                     {"peak_value", event.peak_value},
                     {"threshold_at_trigger", event.threshold_at_trigger},
                     {"severity", to_string(event.severity)}};
    return j.dump();
}

UnsafeEvent event_from_json(std::string_view bytes) {
    nlohmann::json j = parse_or_throw(bytes, "event");
    try {
        UnsafeEvent e;
        e.trip_id = j.at("trip_id").get<std::string>();
        e.kind = event_kind_from_string(j.at("kind").get<std::string>());
        e.start_ts = j.at("start_ts").get<double>();
        e.end_ts = j.at("end_ts").get<double>();
        e.peak_value = j.at("peak_value").get<double>();
        e.threshold_at_trigger = j.at("threshold_at_trigger").get<double>();
        e.severity = severity_from_string(j.at("severity").get<std::string>());
        return e;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("serialize: event schema violation: ") + e.what());
    }
}

std::string classification_to_json(const TripClassification& c,
                                   const std::vector<PathStep>& path) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : path)
        steps.push_back({{"feature", s.feature},
                         {"comparison", s.comparison},
                         {"threshold", s.threshold}});
    nlohmann::json j{{"trip_id", c.trip_id},
                     {"label", to_string(c.label)},
                     {"path", steps}};
    return j.dump();
}

TripClassification classification_from_json(std::string_view bytes) {
    nlohmann::json j = parse_or_throw(bytes, "classification");
    try {
        TripClassification c;
        c.trip_id = j.at("trip_id").get<std::string>();
        c.label = label_from_string(j.at("label").get<std::string>());
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("serialize: classification schema violation: ") +
                              e.what());
    }
}

std::string tip_to_json(const Tip& tip, const std::string& trip_id) {
    nlohmann::json j{{"trip_id", trip_id},
                     {"section_id", tip.section_id},
                     {"text", tip.text},
                     {"grounded", tip.grounded},
                     {"degraded", tip.degraded}};
    return j.dump();
}

} // namespace driveframe
