// driveframe - offline driving telemetry pipeline
//
// One subcommand per pipeline stage. Stages read their input from files
// (or stdin), write their output to files (or stdout) and persist records
// through the local store, so the stages compose either as a shell
// pipeline or via `run-all`.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error, 3 success
// with degraded output (a fallback path fired).

#include <CLI11.hpp>

#include "driveframe/config.hpp"
#include "driveframe/errors.hpp"
#include "driveframe/events.hpp"
#include "driveframe/features.hpp"
#include "driveframe/report.hpp"
#include "driveframe/segmenter.hpp"
#include "driveframe/serialize.hpp"
#include "driveframe/stats.hpp"
#include "driveframe/store.hpp"
#include "driveframe/synth.hpp"
#include "driveframe/telemetry.hpp"
#include "driveframe/timeutil.hpp"
#include "driveframe/tips.hpp"
#include "driveframe/tree.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

namespace {

using namespace driveframe;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitDegraded = 3;

void say(const std::string& line) { std::cerr << line << "\n"; }

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cli: cannot open input '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cli: cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("cli: short write to '" + path + "'");
}

LogFormat format_for(const std::string& requested, const std::string& path) {
    if (requested == "csv") return LogFormat::Csv;
    if (requested == "jsonl") return LogFormat::Jsonl;
    if (!requested.empty())
        throw ValidationError("cli: unknown format '" + requested + "'");
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl")
        return LogFormat::Jsonl;
    return LogFormat::Csv;
}

struct Shared {
    std::string config_path;
    std::string store_path;
    std::string driver_id;
    std::string model_path;
    std::string corpus_path;

    PipelineConfig load() const {
        PipelineConfig cfg =
            config_path.empty() ? PipelineConfig{} : load_config_file(config_path);
        if (!store_path.empty()) cfg.store_path = store_path;
        if (!driver_id.empty()) cfg.driver_id = driver_id;
        if (!model_path.empty()) cfg.model_path = model_path;
        if (!corpus_path.empty()) cfg.corpus_path = corpus_path;
        return cfg;
    }
};

std::unique_ptr<GenerationBackend> make_backend(const PipelineConfig& cfg) {
    if (cfg.backend_kind == "stub") return std::make_unique<StubBackend>();
    if (cfg.backend_kind == "adversarial") {
        AdversarialBackend::Corruption c;
        c.numeral_prob = cfg.backend_numeral_prob;
        c.drop_marker_prob = cfg.backend_drop_marker_prob;
        c.fail_prob = cfg.backend_fail_prob;
        c.seed = cfg.backend_seed;
        return std::make_unique<AdversarialBackend>(c);
    }
    if (cfg.backend_kind == "http") {
        HttpBackend::Options o;
        if (const char* ep = std::getenv("DF_LLM_ENDPOINT")) o.endpoint = ep;
        if (const char* key = std::getenv("DF_LLM_KEY")) o.api_key = key;
        o.max_tokens = cfg.backend_max_tokens;
        o.timeout_s = cfg.backend_timeout_s;
        return std::make_unique<HttpBackend>(std::move(o));
    }
    return std::make_unique<NullBackend>();
}

// ---- stage bodies, shared between subcommands and run-all ----

// Stages are re-runnable against the same store: records whose ids already
// exist are kept as-is (stage output is deterministic for a given store),
// everything else is written and queued.
void persist(Store& store, std::vector<StoreRecord> records) {
    std::vector<StoreRecord> fresh;
    std::vector<std::string> ids;
    for (auto& r : records) {
        ids.push_back(r.record_id);
        if (!store.contains(r.record_id)) fresh.push_back(std::move(r));
    }
    store.put_many(fresh);
    store.enqueue_many(ids);
}

struct CleanResult {
    std::vector<std::vector<SensorSample>> segments;
    IngestReport parse_report;
    IngestReport clean_report;
};

CleanResult ingest_stage(const PipelineConfig& cfg, const std::string& raw,
                         LogFormat format, Store* store) {
    CleanResult out;
    auto [samples, parse_report] = parse_log(raw, format);
    out.parse_report = parse_report;
    auto [segments, clean_report] = clean_stream(samples, cfg.max_gap_s);
    out.segments = std::move(segments);
    out.clean_report = clean_report;

    if (store) {
        std::vector<StoreRecord> records;
        std::size_t seq = 0;
        for (const auto& segment : out.segments)
            for (const auto& s : segment) {
                StoreRecord r;
                r.record_id = "sample-" + cfg.driver_id + "-" + std::to_string(seq++);
                r.kind = RecordKind::Sample;
                r.driver_id = cfg.driver_id;
                r.created_ts = s.ts;
                r.payload = sample_to_csv_line(s);
                records.push_back(std::move(r));
            }
        persist(*store, std::move(records));
    }
    return out;
}

std::string cleaned_to_csv(const CleanResult& cleaned) {
    std::string csv(kCsvHeader);
    csv += '\n';
    for (const auto& segment : cleaned.segments)
        for (const auto& s : segment) csv += sample_to_csv_line(s) + "\n";
    return csv;
}

std::vector<Trip> segment_stage(const PipelineConfig& cfg,
                                const std::vector<std::vector<SensorSample>>& segments,
                                Store* store) {
    std::vector<std::vector<KinematicSample>> kinematic;
    kinematic.reserve(segments.size());
    for (const auto& s : segments) kinematic.push_back(derive_kinematics(s));
    auto trips = segment_trace(kinematic, cfg.segmenter, cfg.driver_id + "-trip");

    if (store) {
        std::vector<StoreRecord> records;
        for (const Trip& t : trips) {
            StoreRecord r;
            r.record_id = t.trip_id;
            r.kind = RecordKind::Trip;
            r.driver_id = cfg.driver_id;
            r.created_ts = t.start_ts;
            r.payload = trip_to_json(t);
            records.push_back(std::move(r));
        }
        persist(*store, std::move(records));
    }
    return trips;
}

std::vector<Trip> trips_from_store(const PipelineConfig& cfg, Store& store) {
    std::vector<Trip> trips;
    for (const StoreRecord& r : store.query_all(RecordKind::Trip, cfg.driver_id))
        trips.push_back(trip_from_json(r.payload));
    return trips;
}

std::vector<UnsafeEvent> detect_stage(const PipelineConfig& cfg,
                                      const std::vector<Trip>& trips, Store* store) {
    std::vector<UnsafeEvent> events;
    for (const Trip& t : trips) {
        auto ev = detect_events(t, cfg.thresholds);
        events.insert(events.end(), ev.begin(), ev.end());
    }
    if (store) {
        std::vector<StoreRecord> records;
        std::map<std::string, std::size_t> seq;
        for (const UnsafeEvent& e : events) {
            StoreRecord r;
            r.record_id = "event-" + e.trip_id + "-" + std::to_string(seq[e.trip_id]++);
            r.kind = RecordKind::Event;
            r.driver_id = cfg.driver_id;
            r.created_ts = e.start_ts;
            r.payload = event_to_json(e);
            records.push_back(std::move(r));
        }
        persist(*store, std::move(records));
    }
    return events;
}

struct ClassifyResult {
    std::vector<TripClassification> classifications;
    std::map<std::string, std::vector<PathStep>> paths;
};

ClassifyResult classify_stage(const PipelineConfig& cfg, const std::vector<Trip>& trips,
                              const DecisionTreeModel& model, Store* store) {
    ClassifyResult out;
    for (const Trip& t : trips) {
        TripFeatures f = extract_features(t, cfg.tz_offset_hours);
        Prediction p = predict(model, f);
        out.classifications.push_back({t.trip_id, p.label});
        out.paths[t.trip_id] = p.path;
    }
    if (store) {
        std::vector<StoreRecord> records;
        for (std::size_t i = 0; i < out.classifications.size(); ++i) {
            const auto& c = out.classifications[i];
            StoreRecord r;
            r.record_id = "class-" + c.trip_id;
            r.kind = RecordKind::Classification;
            r.driver_id = cfg.driver_id;
            r.created_ts = trips[i].start_ts;
            r.payload = classification_to_json(c, out.paths[c.trip_id]);
            records.push_back(std::move(r));
        }
        persist(*store, std::move(records));
    }
    return out;
}

struct TipOutcome {
    std::vector<std::pair<std::string, Tip>> tips;  // (trip_id, tip)
    bool degraded = false;
};

TipOutcome tip_stage(const PipelineConfig& cfg, const std::vector<UnsafeEvent>& events,
                     const CodeCorpus& corpus, GenerationBackend& backend, Store* store) {
    // At most one tip per (trip, kind); the most severe occurrence wins and
    // the most severe groups are served first.
    std::map<std::pair<std::string, EventKind>, UnsafeEvent> best;
    for (const UnsafeEvent& e : events) {
        auto key = std::make_pair(e.trip_id, e.kind);
        auto it = best.find(key);
        if (it == best.end() ||
            static_cast<int>(e.severity) > static_cast<int>(it->second.severity))
            best[key] = e;
    }
    std::vector<UnsafeEvent> ordered;
    for (const auto& [key, e] : best) ordered.push_back(e);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const UnsafeEvent& a, const UnsafeEvent& b) {
                         if (a.severity != b.severity)
                             return static_cast<int>(a.severity) >
                                    static_cast<int>(b.severity);
                         return a.start_ts < b.start_ts;
                     });

    TipOutcome out;
    std::map<std::string, std::size_t> per_trip;
    for (const UnsafeEvent& e : ordered) {
        if (per_trip[e.trip_id] >= cfg.max_tips_per_trip) continue;
        ++per_trip[e.trip_id];
        RetrievedSection section = retrieve(corpus, e.kind);
        Tip tip = generate_tip(backend, cfg.models.refine_model_id, section, e);
        out.degraded |= tip.degraded;
        out.tips.emplace_back(e.trip_id, std::move(tip));
    }

    if (store) {
        std::vector<StoreRecord> records;
        for (const auto& [trip_id, tip] : out.tips) {
            StoreRecord r;
            r.record_id = "tip-" + trip_id + "-" + tip.section_id;
            r.kind = RecordKind::Tip;
            r.driver_id = cfg.driver_id;
            r.created_ts = 0.0;
            r.payload = tip_to_json(tip, trip_id);
            records.push_back(std::move(r));
        }
        persist(*store, std::move(records));
    }
    return out;
}

struct ReportOutcome {
    std::vector<FinalReport> reports;
    bool degraded = false;  // any fallback or backend failure
};

ReportOutcome report_stage(const PipelineConfig& cfg, const std::vector<Trip>& trips,
                           const std::vector<UnsafeEvent>& events,
                           const std::vector<TripClassification>& classifications,
                           GenerationBackend& backend, const std::string& out_dir,
                           Store* store) {
    std::set<std::int64_t> weeks;
    for (const Trip& t : trips)
        weeks.insert(week_monday(local_day(t.start_ts, cfg.tz_offset_hours)));
    if (!weeks.empty()) std::filesystem::create_directories(out_dir);

    ReportOutcome out;
    for (std::int64_t week : weeks) {
        WeeklyStats stats = aggregate_week(trips, events, classifications, cfg.driver_id,
                                           week, cfg.tz_offset_hours);
        FinalReport report = generate_report(backend, cfg.models, stats, cfg.report);
        out.degraded |= report.provenance == Provenance::Fallback || report.degraded;

        const std::string name = "report_" + cfg.driver_id + "_" + iso_date(week) + ".txt";
        write_output((std::filesystem::path(out_dir) / name).string(), report.text);

        if (store) {
            StoreRecord r;
            r.record_id = "report-" + cfg.driver_id + "-" + iso_date(week);
            r.kind = RecordKind::Report;
            r.driver_id = cfg.driver_id;
            r.created_ts = static_cast<double>(week) * 86400.0;
            r.payload = report.text;
            persist(*store, {std::move(r)});
        }
        out.reports.push_back(std::move(report));
    }
    return out;
}

std::string events_to_jsonl(const std::vector<UnsafeEvent>& events) {
    std::string out;
    for (const auto& e : events) out += event_to_json(e) + "\n";
    return out;
}

std::string trips_to_jsonl(const std::vector<Trip>& trips) {
    std::string out;
    for (const auto& t : trips) out += trip_meta_to_jsonl(t) + "\n";
    return out;
}

std::string summarize(const IngestReport& r) {
    std::string s = "accepted=" + std::to_string(r.accepted) +
                    " rejected=" + std::to_string(r.rejected());
    for (const auto& [reason, count] : r.rejected_by_reason)
        s += " " + std::string(to_string(reason)) + "=" + std::to_string(count);
    s += " gaps=" + std::to_string(r.gaps.size());
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"driveframe: offline driving telemetry analysis and feedback"};
    app.require_subcommand(1);

    Shared shared;
    app.add_option("--config", shared.config_path, "Pipeline config JSON");
    app.add_option("--store", shared.store_path, "Override store path");
    app.add_option("--driver", shared.driver_id, "Override driver id");
    app.add_option("--model", shared.model_path, "Override model path");
    app.add_option("--corpus", shared.corpus_path, "Override corpus path");

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
    std::uint64_t synth_seed = 1;
    std::size_t synth_trips = 20;
    double synth_events = 4.0, synth_influenced = 0.0;
    std::string synth_out = "logs.csv", synth_manifest = "manifest.json";
    std::string synth_format;
    synth_cmd->add_option("--seed", synth_seed, "RNG seed");
    synth_cmd->add_option("--trips", synth_trips, "Trip count");
    synth_cmd->add_option("--events-per-trip", synth_events,
                          "Mean injected events per trip");
    synth_cmd->add_option("--influenced", synth_influenced, "Influenced trip fraction");
    synth_cmd->add_option("-o,--out", synth_out, "Log output path or -");
    synth_cmd->add_option("--manifest", synth_manifest, "Manifest output path");
    synth_cmd->add_option("--format", synth_format, "csv|jsonl");

    auto* ingest_cmd = app.add_subcommand("ingest", "Parse and clean raw logs");
    std::string ingest_in = "-", ingest_out = "-", ingest_format;
    ingest_cmd->add_option("-i,--in", ingest_in, "Raw log path or -");
    ingest_cmd->add_option("-o,--out", ingest_out, "Cleaned csv path or -");
    ingest_cmd->add_option("--format", ingest_format, "csv|jsonl");

    auto* segment_cmd = app.add_subcommand("segment", "Detect trips in cleaned samples");
    std::string segment_in = "-", segment_out = "-";
    segment_cmd->add_option("-i,--in", segment_in, "Cleaned csv path or -");
    segment_cmd->add_option("-o,--out", segment_out, "Trips jsonl path or -");

    auto* detect_cmd = app.add_subcommand("detect", "Run the unsafe-event rules");
    std::string detect_out = "-";
    detect_cmd->add_option("-o,--out", detect_out, "Events jsonl path or -");

    auto* features_cmd = app.add_subcommand("features", "Export per-trip features");
    std::string features_out = "features.csv", features_manifest;
    features_cmd->add_option("-o,--out", features_out, "Feature csv path or -");
    features_cmd->add_option("--manifest", features_manifest,
                             "Ground-truth manifest for labels");

    auto* train_cmd = app.add_subcommand("train", "Balance with SMOTE and train the tree");
    std::string train_in = "features.csv", train_out = "model.json";
    train_cmd->add_option("-i,--in", train_in, "Feature csv path");
    train_cmd->add_option("-o,--out", train_out, "Model output path");

    auto* classify_cmd = app.add_subcommand("classify", "Classify stored trips");
    std::string classify_out = "-", classify_manifest;
    classify_cmd->add_option("-o,--out", classify_out, "Classifications jsonl path or -");
    classify_cmd->add_option("--manifest", classify_manifest,
                             "Manifest with ground truth; prints recall");

    auto* tip_cmd = app.add_subcommand("tip", "Generate grounded safety tips");
    std::string tip_out = "tips.jsonl";
    tip_cmd->add_option("-o,--out", tip_out, "Tips jsonl path or -");

    auto* report_cmd = app.add_subcommand("report", "Generate weekly reports");
    std::string report_dir = ".";
    report_cmd->add_option("--out-dir", report_dir, "Directory for report files");

    auto* eval_cmd = app.add_subcommand("eval", "Pre/post statistical tests");
    std::string eval_baseline, eval_intervention, eval_out = "eval_results.csv";
    eval_cmd->add_option("baseline", eval_baseline, "Baseline rates csv")->required();
    eval_cmd->add_option("intervention", eval_intervention, "Intervention rates csv")
        ->required();
    eval_cmd->add_option("-o,--out", eval_out, "Result table csv path");

    auto* sync_cmd = app.add_subcommand("sync", "Flush the offline queue");
    bool sync_online = false;
    std::string sync_uplink = "uplink.jsonl";
    sync_cmd->add_flag("--online", sync_online, "Attempt delivery");
    sync_cmd->add_option("--uplink-out", sync_uplink, "File uplink target");

    auto* runall_cmd = app.add_subcommand("run-all", "Raw logs to weekly reports");
    std::string runall_logs, runall_dir = ".", runall_format;
    runall_cmd->add_option("--logs", runall_logs, "Raw log path")->required();
    runall_cmd->add_option("--out-dir", runall_dir, "Directory for stage outputs");
    runall_cmd->add_option("--format", runall_format, "csv|jsonl");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            synth::ScenarioConfig scfg;
            scfg.seed = synth_seed;
            scfg.trip_count = synth_trips;
            scfg.events_per_trip = synth_events;
            scfg.influenced_fraction = synth_influenced;
            scfg.tz_offset_hours = cfg.tz_offset_hours;
            scfg.thresholds = cfg.thresholds;
            scfg.driver_id = cfg.driver_id;
            auto corpus = synth::generate_corpus(scfg);
            const bool jsonl = format_for(synth_format, synth_out) == LogFormat::Jsonl;
            write_output(synth_out,
                         jsonl ? to_jsonl(corpus.samples) : to_csv(corpus.samples));
            write_output(synth_manifest, synth::manifest_to_json(corpus.manifest));
            say("synth: trips=" + std::to_string(corpus.manifest.trips.size()) +
                " events=" + std::to_string(corpus.manifest.total_events()) +
                " samples=" + std::to_string(corpus.samples.size()));
            return kExitOk;
        }

        if (ingest_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            Store store(cfg.store_path);
            auto result = ingest_stage(cfg, read_input(ingest_in),
                                       format_for(ingest_format, ingest_in), &store);
            write_output(ingest_out, cleaned_to_csv(result));
            say("ingest: parse[" + summarize(result.parse_report) + "] clean[" +
                summarize(result.clean_report) +
                "] segments=" + std::to_string(result.segments.size()));
            return kExitOk;
        }

        if (segment_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            Store store(cfg.store_path);
            auto [samples, parse_report] = parse_log(read_input(segment_in), LogFormat::Csv);
            auto [segments, clean_report] = clean_stream(samples, cfg.max_gap_s);
            auto trips = segment_stage(cfg, segments, &store);
            write_output(segment_out, trips_to_jsonl(trips));
            double km = 0.0;
            for (const auto& t : trips) km += t.distance_km;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2f", km);
            say("segment: trips=" + std::to_string(trips.size()) + " distance_km=" + buf);
            return kExitOk;
        }

        if (detect_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            Store store(cfg.store_path);
            auto trips = trips_from_store(cfg, store);
            auto events = detect_stage(cfg, trips, &store);
            write_output(detect_out, events_to_jsonl(events));
            say("detect: trips=" + std::to_string(trips.size()) +
                " events=" + std::to_string(events.size()));
            return kExitOk;
        }

        if (features_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            Store store(cfg.store_path);
            auto trips = trips_from_store(cfg, store);
            LabeledDataset data;
            std::optional<synth::GroundTruthManifest> manifest;
            if (!features_manifest.empty())
                manifest = synth::manifest_from_json(read_input(features_manifest));
            for (const Trip& t : trips) {
                Label label = Label::Sober;
                if (manifest) {
                    for (const auto& mt : manifest->trips)
                        if (t.start_ts >= mt.start_ts - 1.0 && t.start_ts <= mt.end_ts + 1.0)
                            label = mt.influenced ? Label::Influenced : Label::Sober;
                }
                data.rows.emplace_back(extract_features(t, cfg.tz_offset_hours), label);
            }
            write_output(features_out, dataset_to_csv(data));
            say("features: rows=" + std::to_string(data.rows.size()));
            return kExitOk;
        }

        if (train_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            LabeledDataset data = dataset_from_csv(read_input(train_in));
            LabeledDataset balanced = smote_balance(data, cfg.train);
            DecisionTreeModel model = train_tree(balanced, cfg.train);
            write_output(train_out, save_model(model));
            say("train: rows=" + std::to_string(data.rows.size()) +
                " balanced=" + std::to_string(balanced.rows.size()) +
                " depth=" + std::to_string(model.depth()) +
                " nodes=" + std::to_string(model.nodes.size()));
            return kExitOk;
        }

        if (classify_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            if (cfg.model_path.empty())
                throw ValidationError(
                    "cli: classify needs a model (config model_path or --model)");
            Store store(cfg.store_path);
            auto trips = trips_from_store(cfg, store);
            DecisionTreeModel model = load_model(read_input(cfg.model_path));
            auto result = classify_stage(cfg, trips, model, &store);

            std::string jsonl;
            for (const auto& c : result.classifications)
                jsonl += classification_to_json(c, result.paths[c.trip_id]) + "\n";
            write_output(classify_out, jsonl);

            std::string note;
            if (!classify_manifest.empty()) {
                auto manifest = synth::manifest_from_json(read_input(classify_manifest));
                std::size_t influenced_total = 0, influenced_hit = 0;
                for (std::size_t i = 0; i < trips.size(); ++i) {
                    for (const auto& mt : manifest.trips) {
                        if (trips[i].start_ts >= mt.start_ts - 1.0 &&
                            trips[i].start_ts <= mt.end_ts + 1.0 && mt.influenced) {
                            ++influenced_total;
                            if (result.classifications[i].label == Label::Influenced)
                                ++influenced_hit;
                        }
                    }
                }
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f",
                              influenced_total == 0
                                  ? 1.0
                                  : static_cast<double>(influenced_hit) /
                                        static_cast<double>(influenced_total));
                note = std::string(" recall=") + buf;
            }
            std::size_t influenced = 0;
            for (const auto& c : result.classifications)
                if (c.label == Label::Influenced) ++influenced;
            say("classify: trips=" + std::to_string(trips.size()) +
                " influenced=" + std::to_string(influenced) + note);
            return kExitOk;
        }

        if (tip_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            if (cfg.corpus_path.empty())
                throw ValidationError(
                    "cli: tip needs a corpus (config corpus_path or --corpus)");
            Store store(cfg.store_path);
            CodeCorpus corpus = load_corpus(read_input(cfg.corpus_path));
            std::vector<UnsafeEvent> events;
            for (const StoreRecord& r : store.query_all(RecordKind::Event, cfg.driver_id))
                events.push_back(event_from_json(r.payload));
            auto backend = make_backend(cfg);
            auto outcome = tip_stage(cfg, events, corpus, *backend, &store);

            std::string jsonl;
            for (const auto& [trip_id, tip] : outcome.tips)
                jsonl += tip_to_json(tip, trip_id) + "\n";
            write_output(tip_out, jsonl);
            say("tip: tips=" + std::to_string(outcome.tips.size()) +
                (outcome.degraded ? " degraded=yes" : ""));
            return outcome.degraded ? kExitDegraded : kExitOk;
        }

        if (report_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            Store store(cfg.store_path);
            auto trips = trips_from_store(cfg, store);
            std::vector<UnsafeEvent> events;
            for (const StoreRecord& r : store.query_all(RecordKind::Event, cfg.driver_id))
                events.push_back(event_from_json(r.payload));
            std::vector<TripClassification> classifications;
            for (const StoreRecord& r :
                 store.query_all(RecordKind::Classification, cfg.driver_id))
                classifications.push_back(classification_from_json(r.payload));
            auto backend = make_backend(cfg);
            auto outcome = report_stage(cfg, trips, events, classifications, *backend,
                                        report_dir, &store);
            say("report: weeks=" + std::to_string(outcome.reports.size()) +
                (outcome.degraded ? " degraded=yes" : ""));
            return outcome.degraded ? kExitDegraded : kExitOk;
        }

        if (eval_cmd->parsed()) {
            // Rates csv: driver_id,kind,rate
            auto load_rates = [](const std::string& path) {
                std::map<std::string, std::map<std::string, double>> by_kind;
                std::istringstream in(read_input(path));
                std::string line;
                bool first = true;
                while (std::getline(in, line)) {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (line.empty()) continue;
                    if (first) {
                        if (line != "driver_id,kind,rate")
                            throw ValidationError(
                                "eval: csv header must be 'driver_id,kind,rate'");
                        first = false;
                        continue;
                    }
                    auto c1 = line.find(',');
                    auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
                    if (c1 == std::string::npos || c2 == std::string::npos)
                        throw ValidationError("eval: bad row '" + line + "'");
                    try {
                        by_kind[line.substr(c1 + 1, c2 - c1 - 1)][line.substr(0, c1)] =
                            std::stod(line.substr(c2 + 1));
                    } catch (const std::exception&) {
                        throw ValidationError("eval: bad rate in row '" + line + "'");
                    }
                }
                return by_kind;
            };
            auto baseline = load_rates(eval_baseline);
            auto intervention = load_rates(eval_intervention);

            std::string csv = "kind,test,statistic,p_value,n,method\n";
            std::ostringstream table;
            for (const auto& [kind, base_rates] : baseline) {
                if (!intervention.count(kind)) continue;
                stats::PairedSample paired;
                std::vector<double> xs, ys;
                for (const auto& [driver, rate] : base_rates) {
                    auto it = intervention.at(kind).find(driver);
                    if (it == intervention.at(kind).end()) continue;
                    paired.pairs.emplace_back(rate, it->second);
                    xs.push_back(rate);
                    ys.push_back(it->second);
                }
                auto row = [&](const std::string& test, const stats::TestResult& r) {
                    char buf[224];
                    std::snprintf(buf, sizeof(buf), "%s,%s,%.9g,%.9g,%zu,%s\n",
                                  kind.c_str(), test.c_str(), r.statistic, r.p_value,
                                  r.n_effective, r.method_note.c_str());
                    csv += buf;
                    std::snprintf(buf, sizeof(buf),
                                  "%-18s %-9s stat=%-11.4g p=%-11.4g n=%zu (%s)",
                                  kind.c_str(), test.c_str(), r.statistic, r.p_value,
                                  r.n_effective, r.method_note.c_str());
                    table << buf << "\n";
                };
                auto err_row = [&](const std::string& test, const std::string& why) {
                    csv += kind + "," + test + ",,,,\"" + why + "\"\n";
                    table << kind << " " << test << ": " << why << "\n";
                };
                try {
                    row("paired-t", stats::paired_t_test(paired));
                } catch (const ValidationError& e) {
                    err_row("paired-t", e.what());
                }
                try {
                    row("wilcoxon", stats::wilcoxon_signed_rank(paired));
                } catch (const ValidationError& e) {
                    err_row("wilcoxon", e.what());
                }
                try {
                    row("pearson", stats::pearson_r(xs, ys));
                } catch (const ValidationError& e) {
                    err_row("pearson", e.what());
                }
            }
            write_output(eval_out, csv);
            std::cout << table.str();
            say("eval: results written to " + eval_out);
            return kExitOk;
        }

        if (sync_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            Store store(cfg.store_path);
            FileUplink uplink{sync_uplink};
            auto report = store.flush(
                sync_online ? Connectivity::Online : Connectivity::Offline, uplink);
            say("sync: sent=" + std::to_string(report.sent) +
                " failed=" + std::to_string(report.failed) +
                " pending=" + std::to_string(report.remaining_pending));
            return kExitOk;
        }

        if (runall_cmd->parsed()) {
            PipelineConfig cfg = shared.load();
            Store store(cfg.store_path);
            const std::filesystem::path dir(runall_dir);
            std::filesystem::create_directories(dir);

            auto cleaned = ingest_stage(cfg, read_input(runall_logs),
                                        format_for(runall_format, runall_logs), &store);
            write_output((dir / "cleaned.csv").string(), cleaned_to_csv(cleaned));
            say("run-all ingest: parse[" + summarize(cleaned.parse_report) + "]");

            auto trips = segment_stage(cfg, cleaned.segments, &store);
            write_output((dir / "trips.jsonl").string(), trips_to_jsonl(trips));
            say("run-all segment: trips=" + std::to_string(trips.size()));

            auto events = detect_stage(cfg, trips, &store);
            write_output((dir / "events.jsonl").string(), events_to_jsonl(events));
            say("run-all detect: events=" + std::to_string(events.size()));

            std::vector<TripClassification> classifications;
            if (!cfg.model_path.empty()) {
                DecisionTreeModel model = load_model(read_input(cfg.model_path));
                auto result = classify_stage(cfg, trips, model, &store);
                classifications = result.classifications;
                std::string jsonl;
                for (const auto& c : result.classifications)
                    jsonl += classification_to_json(c, result.paths[c.trip_id]) + "\n";
                write_output((dir / "classifications.jsonl").string(), jsonl);
                say("run-all classify: trips=" + std::to_string(trips.size()));
            } else {
                say("run-all classify: skipped (no model configured)");
            }

            bool degraded = false;
            if (!cfg.corpus_path.empty()) {
                CodeCorpus code = load_corpus(read_input(cfg.corpus_path));
                auto backend = make_backend(cfg);
                auto tips = tip_stage(cfg, events, code, *backend, &store);
                std::string jsonl;
                for (const auto& [trip_id, tip] : tips.tips)
                    jsonl += tip_to_json(tip, trip_id) + "\n";
                write_output((dir / "tips.jsonl").string(), jsonl);
                degraded |= tips.degraded;
                say("run-all tip: tips=" + std::to_string(tips.tips.size()) +
                    (tips.degraded ? " degraded=yes" : ""));
            } else {
                say("run-all tip: skipped (no corpus configured)");
            }

            auto backend = make_backend(cfg);
            auto reports = report_stage(cfg, trips, events, classifications, *backend,
                                        dir.string(), &store);
            degraded |= reports.degraded;
            say("run-all report: weeks=" + std::to_string(reports.reports.size()) +
                (reports.degraded ? " degraded=yes" : ""));

            return degraded ? kExitDegraded : kExitOk;
        }
    } catch (const ValidationError& e) {
        say(std::string("error: ") + e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        say(std::string("error: ") + e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
