#include "driveframe/config.hpp"

#include "driveframe/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace driveframe {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void require_path(const std::string& path, const std::string& key) {
    if (path.empty()) return;
    if (!std::filesystem::exists(path))
        throw ValidationError("config: " + key + " '" + path + "' does not exist");
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || base_dir.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

} // namespace

PipelineConfig load_config(std::string_view bytes, const std::string& base_dir) {
    json j = json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ValidationError("config: file is not a JSON object");

    PipelineConfig cfg;
    try {
        reject_unknown(j, {"tz_offset_hours", "driver_id", "store_path", "max_gap_s",
                           "segmenter", "thresholds", "train", "peer_rates",
                           "banned_phrases", "models", "corpus_path", "model_path",
                           "backend", "max_tips_per_trip"},
                       "config root");

        read(j, "tz_offset_hours", cfg.tz_offset_hours);
        read(j, "driver_id", cfg.driver_id);
        read(j, "store_path", cfg.store_path);
        read(j, "max_gap_s", cfg.max_gap_s);
        read(j, "corpus_path", cfg.corpus_path);
        read(j, "model_path", cfg.model_path);
        read(j, "max_tips_per_trip", cfg.max_tips_per_trip);

        if (j.contains("segmenter")) {
            const auto& s = j.at("segmenter");
            reject_unknown(s, {"start_speed", "start_hold", "stop_speed", "stop_hold"},
                           "segmenter");
            read(s, "start_speed", cfg.segmenter.start_speed);
            read(s, "start_hold", cfg.segmenter.start_hold);
            read(s, "stop_speed", cfg.segmenter.stop_speed);
            read(s, "stop_hold", cfg.segmenter.stop_hold);
        }
        if (j.contains("thresholds")) {
            const auto& t = j.at("thresholds");
            reject_unknown(t,
                           {"brake_lo", "brake_hi", "v_lo", "v_hi", "accel_limit",
                            "speed_limit", "speed_margin", "speed_min_dur", "swerve_limit",
                            "swerve_min_speed", "merge_window"},
                           "thresholds");
            read(t, "brake_lo", cfg.thresholds.brake_lo);
            read(t, "brake_hi", cfg.thresholds.brake_hi);
            read(t, "v_lo", cfg.thresholds.v_lo);
            read(t, "v_hi", cfg.thresholds.v_hi);
            read(t, "accel_limit", cfg.thresholds.accel_limit);
            read(t, "speed_limit", cfg.thresholds.speed_limit);
            read(t, "speed_margin", cfg.thresholds.speed_margin);
            read(t, "speed_min_dur", cfg.thresholds.speed_min_dur);
            read(t, "swerve_limit", cfg.thresholds.swerve_limit);
            read(t, "swerve_min_speed", cfg.thresholds.swerve_min_speed);
            read(t, "merge_window", cfg.thresholds.merge_window);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            reject_unknown(t, {"max_depth", "min_samples_leaf", "smote_k", "seed"}, "train");
            read(t, "max_depth", cfg.train.max_depth);
            read(t, "min_samples_leaf", cfg.train.min_samples_leaf);
            read(t, "smote_k", cfg.train.smote_k);
            read(t, "seed", cfg.train.seed);
        }
        if (j.contains("peer_rates")) {
            for (auto it = j.at("peer_rates").begin(); it != j.at("peer_rates").end(); ++it)
                cfg.report.peer_rates[event_kind_from_string(it.key())] =
                    it.value().get<double>();
        }
        if (j.contains("banned_phrases"))
            cfg.report.banned_phrases =
                j.at("banned_phrases").get<std::vector<std::string>>();
        if (j.contains("models")) {
            const auto& m = j.at("models");
            reject_unknown(m, {"draft", "refine"}, "models");
            read(m, "draft", cfg.models.draft_model_id);
            read(m, "refine", cfg.models.refine_model_id);
        }
        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            reject_unknown(b,
                           {"kind", "timeout_s", "max_tokens", "seed", "numeral_prob",
                            "drop_marker_prob", "fail_prob"},
                           "backend");
            read(b, "kind", cfg.backend_kind);
            read(b, "timeout_s", cfg.backend_timeout_s);
            read(b, "max_tokens", cfg.backend_max_tokens);
            read(b, "seed", cfg.backend_seed);
            read(b, "numeral_prob", cfg.backend_numeral_prob);
            read(b, "drop_marker_prob", cfg.backend_drop_marker_prob);
            read(b, "fail_prob", cfg.backend_fail_prob);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: schema violation: ") + e.what());
    }

    if (cfg.backend_kind != "stub" && cfg.backend_kind != "adversarial" &&
        cfg.backend_kind != "http" && cfg.backend_kind != "none")
        throw ValidationError("config: backend kind '" + cfg.backend_kind +
                              "' is not one of stub|adversarial|http|none");

    cfg.segmenter.validate();
    cfg.thresholds.validate();
    cfg.train.validate();

    cfg.corpus_path = resolve(base_dir, cfg.corpus_path);
    cfg.model_path = resolve(base_dir, cfg.model_path);
    cfg.store_path = resolve(base_dir, cfg.store_path);
    require_path(cfg.corpus_path, "corpus_path");
    require_path(cfg.model_path, "model_path");
    return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

} // namespace driveframe
