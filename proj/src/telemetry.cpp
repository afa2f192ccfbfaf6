#include "driveframe/telemetry.hpp"

#include "driveframe/circular.hpp"
#include "driveframe/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>

namespace driveframe {

namespace {

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t extra;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0) extra = 3;
        else return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if (i + k >= s.size()) return false;
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view tok) {
    tok = trim(tok);
    if (tok.empty() || tok.size() > 63) return std::nullopt;
    char buf[64];
    std::memcpy(buf, tok.data(), tok.size());
    buf[tok.size()] = '\0';
    char* end = nullptr;
    double v = std::strtod(buf, &end);
    if (end != buf + tok.size()) return std::nullopt;
    return v;
}

// nullopt = well-formed; otherwise the reason the record fails validation.
std::optional<RejectReason> validate(const SensorSample& s) {
    const double fields[8] = {s.ts, s.lat, s.lon, s.speed, s.course, s.ax, s.ay, s.az};
    for (double f : fields)
        if (!std::isfinite(f)) return RejectReason::NonFinite;
    if (s.lat < -90.0 || s.lat > 90.0) return RejectReason::OutOfRange;
    if (s.lon < -180.0 || s.lon > 180.0) return RejectReason::OutOfRange;
    if (s.speed < 0.0) return RejectReason::OutOfRange;
    if (s.course < 0.0 || s.course >= 360.0) return RejectReason::OutOfRange;
    return std::nullopt;
}

void parse_csv_line(std::string_view line, std::vector<SensorSample>& out, IngestReport& report) {
    double vals[8];
    std::size_t field = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            if (field >= 8) {
                report.count(RejectReason::Malformed);
                return;
            }
            auto v = parse_double(line.substr(start, i - start));
            if (!v) {
                report.count(RejectReason::Malformed);
                return;
            }
            vals[field++] = *v;
            start = i + 1;
        }
    }
    if (field != 8) {
        report.count(RejectReason::Malformed);
        return;
    }
    SensorSample s{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7]};
    if (auto why = validate(s)) {
        report.count(*why);
        return;
    }
    out.push_back(s);
    ++report.accepted;
}

void parse_jsonl_line(std::string_view line, std::vector<SensorSample>& out, IngestReport& report) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    static const char* keys[8] = {"ts", "lat", "lon", "speed", "course", "ax", "ay", "az"};
    if (j.is_discarded() || !j.is_object()) {
        report.count(RejectReason::Malformed);
        return;
    }
    double vals[8];
    for (int k = 0; k < 8; ++k) {
        auto it = j.find(keys[k]);
        if (it == j.end() || !it->is_number()) {
            report.count(RejectReason::Malformed);
            return;
        }
        vals[k] = it->get<double>();
    }
    SensorSample s{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7]};
    if (auto why = validate(s)) {
        report.count(*why);
        return;
    }
    out.push_back(s);
    ++report.accepted;
}

} // namespace

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::Malformed: return "malformed";
        case RejectReason::OutOfRange: return "out-of-range";
        case RejectReason::NonFinite: return "non-finite";
        case RejectReason::NonMonotonic: return "non-monotonic";
    }
    return "unknown";
}

std::size_t IngestReport::rejected() const {
    std::size_t n = 0;
    for (const auto& [reason, count] : rejected_by_reason) n += count;
    return n;
}

void IngestReport::count(RejectReason r) { ++rejected_by_reason[r]; }

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    std::string s(buf);
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::size_t last = s.find_last_not_of('0');
        s.erase(last == dot ? dot : last + 1);
    }
    if (s == "-0") s = "0";
    return s;
}

std::pair<std::vector<SensorSample>, IngestReport>
parse_log(std::string_view stream, LogFormat format) {
    if (!valid_utf8(stream))
        throw ValidationError("ingest: stream is not decodable as UTF-8");

    std::vector<SensorSample> out;
    IngestReport report;

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= stream.size(); ++i) {
        if (i == stream.size() || stream[i] == '\n') {
            std::string_view line = trim(stream.substr(start, i - start));
            if (!line.empty()) lines.push_back(line);
            start = i + 1;
        }
    }
    if (lines.empty()) return {out, report};

    std::size_t first = 0;
    if (format == LogFormat::Csv) {
        if (trim(lines[0]) != kCsvHeader)
            throw ValidationError("ingest: csv header mismatch, expected '" +
                                  std::string(kCsvHeader) + "'");
        first = 1;
    }
    for (std::size_t i = first; i < lines.size(); ++i) {
        if (format == LogFormat::Csv)
            parse_csv_line(lines[i], out, report);
        else
            parse_jsonl_line(lines[i], out, report);
    }
    return {out, report};
}

std::pair<std::vector<std::vector<SensorSample>>, IngestReport>
clean_stream(const std::vector<SensorSample>& samples, double max_gap) {
    std::vector<std::vector<SensorSample>> segments;
    IngestReport report;

    std::vector<SensorSample> cur;
    double last_ts = 0.0;
    bool have_last = false;
    for (SensorSample s : samples) {
        if (have_last && s.ts <= last_ts) {
            report.count(RejectReason::NonMonotonic);
            continue;
        }
        s.ax = std::clamp(s.ax, -kAccelClamp, kAccelClamp);
        s.ay = std::clamp(s.ay, -kAccelClamp, kAccelClamp);
        s.az = std::clamp(s.az, -kAccelClamp, kAccelClamp);
        if (have_last && s.ts - last_ts > max_gap) {
            report.gaps.push_back({s.ts, s.ts - last_ts});
            if (!cur.empty()) segments.push_back(std::move(cur));
            cur.clear();
        }
        cur.push_back(s);
        ++report.accepted;
        last_ts = s.ts;
        have_last = true;
    }
    if (!cur.empty()) segments.push_back(std::move(cur));
    return {segments, report};
}

std::vector<KinematicSample> derive_kinematics(const std::vector<SensorSample>& segment) {
    std::vector<KinematicSample> out;
    out.reserve(segment.size());
    for (std::size_t i = 0; i < segment.size(); ++i) {
        KinematicSample k;
        k.base = segment[i];
        if (i > 0) {
            double dt = segment[i].ts - segment[i - 1].ts;
            if (dt <= 0.0)
                throw ValidationError("ingest: derive_kinematics requires strictly increasing timestamps");
            k.long_accel = (segment[i].speed - segment[i - 1].speed) / dt;
            k.course_rate = shortest_arc_deg(segment[i - 1].course, segment[i].course) / dt;
        }
        out.push_back(k);
    }
    return out;
}

std::string sample_to_csv_line(const SensorSample& s) {
    std::string line;
    const double fields[8] = {s.ts, s.lat, s.lon, s.speed, s.course, s.ax, s.ay, s.az};
    for (int i = 0; i < 8; ++i) {
        if (i) line += ',';
        line += format_number(fields[i]);
    }
    return line;
}

std::string to_csv(const std::vector<SensorSample>& samples) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& s : samples) {
        out += sample_to_csv_line(s);
        out += '\n';
    }
    return out;
}

std::string to_jsonl(const std::vector<SensorSample>& samples) {
    std::string out;
    for (const auto& s : samples) {
        nlohmann::json j{{"ts", s.ts},     {"lat", s.lat}, {"lon", s.lon},
                         {"speed", s.speed}, {"course", s.course}, {"ax", s.ax},
                         {"ay", s.ay},     {"az", s.az}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace driveframe
