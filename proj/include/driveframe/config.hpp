#pragma once

#include "driveframe/events.hpp"
#include "driveframe/report.hpp"
#include "driveframe/segmenter.hpp"
#include "driveframe/smote.hpp"

#include <string>

namespace driveframe {

// Everything the CLI needs in one JSON file. Unknown keys are rejected at
// every level and any referenced path must exist when the file loads.
struct PipelineConfig {
    double tz_offset_hours = 1.0;
    std::string driver_id = "driver-1";
    std::string store_path = "driveframe.store";
    double max_gap_s = 5.0;

    SegmenterConfig segmenter;
    ThresholdProfile thresholds;
    TrainConfig train;
    ReportConfig report;
    ReportModelSpec models;

    std::string corpus_path;  // Highway Code corpus JSON
    std::string model_path;   // trained classifier

    // "stub" | "adversarial" | "http" | "none"
    std::string backend_kind = "none";
    double backend_timeout_s = 30.0;
    int backend_max_tokens = 800;
    std::uint64_t backend_seed = 0;
    double backend_numeral_prob = 0.0;
    double backend_drop_marker_prob = 0.0;
    double backend_fail_prob = 0.0;

    std::size_t max_tips_per_trip = 4;
};

PipelineConfig load_config(std::string_view bytes, const std::string& base_dir = "");
PipelineConfig load_config_file(const std::string& path);

} // namespace driveframe
