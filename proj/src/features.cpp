#include "driveframe/features.hpp"

#include "driveframe/circular.hpp"
#include "driveframe/errors.hpp"
#include "driveframe/timeutil.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace driveframe {

std::string_view to_string(Label l) {
    return l == Label::Influenced ? "Influenced" : "Sober";
}

Label label_from_string(std::string_view s) {
    if (s == "Influenced") return Label::Influenced;
    if (s == "Sober") return Label::Sober;
    throw ValidationError("features: unknown label '" + std::string(s) + "'");
}

TripFeatures extract_features(const Trip& trip, double tz_offset_hours) {
    const auto& samples = trip.samples;
    if (samples.size() < 2)
        throw ValidationError("features: trip '" + trip.trip_id +
                              "' has fewer than 2 samples");

    std::vector<double> hour_angles, course_angles;
    hour_angles.reserve(samples.size());
    course_angles.reserve(samples.size());
    double speed_sum = 0.0, speed_sq = 0.0, ay_sum = 0.0;
    for (const auto& k : samples) {
        double hour = local_hour(k.base.ts, tz_offset_hours);
        hour_angles.push_back(hour / 24.0 * 2.0 * std::numbers::pi);
        course_angles.push_back(k.base.course * kDegToRad);
        speed_sum += k.base.speed;
        speed_sq += k.base.speed * k.base.speed;
        ay_sum += k.base.ay;
    }
    const double n = static_cast<double>(samples.size());

    TripFeatures f;
    f.mean_hour = circular_mean_rad(hour_angles) / (2.0 * std::numbers::pi) * 24.0;
    if (f.mean_hour >= 24.0) f.mean_hour = 0.0;
    f.day_of_week = static_cast<double>(
        day_of_week(local_day(trip.start_ts, tz_offset_hours)));
    double var = speed_sq / n - (speed_sum / n) * (speed_sum / n);
    f.speed_std = std::sqrt(std::max(0.0, var));
    f.course_std = circular_std_deg(course_angles);
    f.mean_accel_y = ay_sum / n;
    return f;
}

std::string dataset_to_csv(const LabeledDataset& data) {
    std::string out(kFeatureCsvHeader);
    out += '\n';
    for (const auto& [f, label] : data.rows) {
        char buf[192];
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%s\n", f.mean_hour,
                      f.day_of_week, f.speed_std, f.course_std, f.mean_accel_y,
                      std::string(to_string(label)).c_str());
        out += buf;
    }
    return out;
}

LabeledDataset dataset_from_csv(std::string_view csv) {
    LabeledDataset data;
    std::istringstream in{std::string(csv)};
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            if (line != kFeatureCsvHeader)
                throw ValidationError("features: csv header mismatch, expected '" +
                                      std::string(kFeatureCsvHeader) + "'");
            first = false;
            continue;
        }
        std::array<double, kFeatureCount> vals{};
        std::size_t pos = 0;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            auto comma = line.find(',', pos);
            if (comma == std::string::npos)
                throw ValidationError("features: short csv row '" + line + "'");
            try {
                vals[i] = std::stod(line.substr(pos, comma - pos));
            } catch (const std::exception&) {
                throw ValidationError("features: bad number in row '" + line + "'");
            }
            pos = comma + 1;
        }
        data.rows.emplace_back(TripFeatures::from_array(vals),
                               label_from_string(line.substr(pos)));
    }
    return data;
}

} // namespace driveframe
