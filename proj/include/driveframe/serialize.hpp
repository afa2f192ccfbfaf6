#pragma once

#include "driveframe/events.hpp"
#include "driveframe/report.hpp"
#include "driveframe/segmenter.hpp"
#include "driveframe/tips.hpp"
#include "driveframe/tree.hpp"

#include <string>

namespace driveframe {

// Full trip payload (samples included) for the record store.
std::string trip_to_json(const Trip& trip);
Trip trip_from_json(std::string_view bytes);

// One-line export record: trip_id, start_ts, end_ts, distance, sample count.
std::string trip_meta_to_jsonl(const Trip& trip);

std::string event_to_json(const UnsafeEvent& event);
UnsafeEvent event_from_json(std::string_view bytes);

std::string classification_to_json(const TripClassification& c,
                                   const std::vector<PathStep>& path);
TripClassification classification_from_json(std::string_view bytes);

std::string tip_to_json(const Tip& tip, const std::string& trip_id);

} // namespace driveframe
