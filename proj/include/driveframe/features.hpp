#pragma once

#include "driveframe/segmenter.hpp"

#include <array>
#include <string>
#include <vector>

namespace driveframe {

inline constexpr std::size_t kFeatureCount = 5;

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "mean_hour", "day_of_week", "speed_std", "course_std", "mean_accel_y"};

inline constexpr const char* kFeatureCsvHeader =
    "mean_hour,day_of_week,speed_std,course_std,mean_accel_y,label";

// Per-trip feature vector, in the fixed order of kFeatureNames.
// Hour-of-day and course are treated circularly: an arithmetic mean across
// midnight or a naive course std across 0/360 would be meaningless.
struct TripFeatures {
    double mean_hour = 0.0;     // [0, 24), circular mean of sample hour-of-day
    double day_of_week = 0.0;   // Monday = 0, from trip start, local time
    double speed_std = 0.0;     // population sigma, m/s
    double course_std = 0.0;    // circular std, degrees
    double mean_accel_y = 0.0;  // m/s^2

    std::array<double, kFeatureCount> as_array() const {
        return {mean_hour, day_of_week, speed_std, course_std, mean_accel_y};
    }
    static TripFeatures from_array(const std::array<double, kFeatureCount>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }
    bool operator==(const TripFeatures&) const = default;
};

enum class Label { Sober, Influenced };

std::string_view to_string(Label l);
Label label_from_string(std::string_view s);

struct LabeledDataset {
    std::vector<std::pair<TripFeatures, Label>> rows;
};

// Requires at least two samples.
TripFeatures extract_features(const Trip& trip, double tz_offset_hours);

// csv round-trip for offline training sets (header kFeatureCsvHeader).
std::string dataset_to_csv(const LabeledDataset& data);
LabeledDataset dataset_from_csv(std::string_view csv);

} // namespace driveframe
