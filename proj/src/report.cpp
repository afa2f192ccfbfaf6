#include "driveframe/report.hpp"

#include "driveframe/prompts.hpp"
#include "driveframe/textscan.hpp"
#include "driveframe/timeutil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace driveframe {

namespace {

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

// One-decimal rounding through the same printf path fmt1 uses, so the
// renderer and the checker can never disagree on a halfway case.
double round1(double v) { return std::strtod(fmt1(v).c_str(), nullptr); }

std::string_view kind_phrase(EventKind k) {
    switch (k) {
        case EventKind::HarshAcceleration: return "harsh acceleration";
        case EventKind::HarshBraking: return "harsh braking";
        case EventKind::Speeding: return "speeding";
        case EventKind::Swerving: return "swerving";
    }
    return "unsafe driving";
}

// Kinds with a nonzero count, most frequent first, stable by enum order.
std::vector<EventKind> top_kinds(const WeeklyStats& stats, std::size_t limit) {
    std::vector<EventKind> kinds;
    for (EventKind k : kAllEventKinds)
        if (stats.events_by_kind.count(k) && stats.events_by_kind.at(k) > 0)
            kinds.push_back(k);
    std::stable_sort(kinds.begin(), kinds.end(), [&](EventKind a, EventKind b) {
        return stats.events_by_kind.at(a) > stats.events_by_kind.at(b);
    });
    if (kinds.size() > limit) kinds.resize(limit);
    return kinds;
}

} // namespace

std::size_t WeeklyStats::total_events() const {
    std::size_t n = 0;
    for (const auto& [kind, count] : events_by_kind) n += count;
    return n;
}

namespace {

WeeklyStats aggregate_one_week(const std::vector<Trip>& trips,
                               const std::vector<UnsafeEvent>& events,
                               const std::vector<TripClassification>& classifications,
                               const std::string& driver_id, std::int64_t week_start_day,
                               double tz) {
    WeeklyStats s;
    s.driver_id = driver_id;
    s.week_start_day = week_start_day;
    for (EventKind k : kAllEventKinds) s.events_by_kind[k] = 0;

    std::vector<const Trip*> included;
    for (const Trip& t : trips) {
        std::int64_t day = local_day(t.start_ts, tz);
        if (day >= week_start_day && day < week_start_day + 7) included.push_back(&t);
    }
    s.trips = included.size();
    for (const Trip* t : included) s.distance_km += t->distance_km;

    auto in_week = [&](const std::string& trip_id) {
        for (const Trip* t : included)
            if (t->trip_id == trip_id) return true;
        return false;
    };
    for (const UnsafeEvent& e : events)
        if (in_week(e.trip_id)) ++s.events_by_kind[e.kind];
    for (const TripClassification& c : classifications)
        if (c.label == Label::Influenced && in_week(c.trip_id)) ++s.influenced_trips;

    if (s.distance_km > 0.0)
        for (EventKind k : kAllEventKinds)
            s.events_per_100km[k] =
                static_cast<double>(s.events_by_kind[k]) * 100.0 / s.distance_km;
    return s;
}

} // namespace

WeeklyStats aggregate_week(const std::vector<Trip>& trips,
                           const std::vector<UnsafeEvent>& events,
                           const std::vector<TripClassification>& classifications,
                           const std::string& driver_id, std::int64_t week_start_day,
                           double tz_offset_hours) {
    if (day_of_week(week_start_day) != 0)
        throw ValidationError("report: week_start " + iso_date(week_start_day) +
                              " is not a Monday");
    WeeklyStats cur = aggregate_one_week(trips, events, classifications, driver_id,
                                         week_start_day, tz_offset_hours);
    WeeklyStats prev = aggregate_one_week(trips, events, classifications, driver_id,
                                          week_start_day - 7, tz_offset_hours);
    if (prev.trips > 0) {
        std::map<EventKind, long long> deltas;
        for (EventKind k : kAllEventKinds)
            deltas[k] = static_cast<long long>(cur.events_by_kind[k]) -
                        static_cast<long long>(prev.events_by_kind[k]);
        cur.deltas_vs_prev_week = std::move(deltas);
    }
    return cur;
}

ReportPlan plan_report(const WeeklyStats& stats, const ReportConfig& cfg) {
    ReportPlan plan;

    if (stats.trips == 0) {
        plan.attitude_points.push_back(
            "No trips were recorded this week, so your record stays clean.");
        plan.norm_points.push_back(
            "Nothing to compare this week; check back after your next drive.");
        plan.control_points.push_back(
            "When you next drive, keep your habits smooth: gentle inputs and steady speeds.");
        return plan;
    }

    const auto kinds = top_kinds(stats, 2);

    plan.attitude_points.push_back("You completed " + std::to_string(stats.trips) +
                                   " trips covering " + fmt1(stats.distance_km) +
                                   " km this week.");
    if (stats.total_events() == 0) {
        plan.attitude_points.push_back(
            "No unsafe events were detected; that consistency keeps you and everyone "
            "around you safer.");
    } else {
        for (EventKind k : kinds)
            plan.attitude_points.push_back(
                std::string(kind_phrase(k)) + " came up " +
                std::to_string(stats.events_by_kind.at(k)) +
                " times; every one you avoid lowers your crash risk and your running "
                "costs.");
    }
    if (stats.influenced_trips > 0)
        plan.attitude_points.push_back(
            std::to_string(stats.influenced_trips) +
            " trips showed patterns associated with alcohol influence; arranging a "
            "sober ride protects your licence and your life.");
    if (stats.deltas_vs_prev_week) {
        for (EventKind k : kAllEventKinds) {
            long long d = stats.deltas_vs_prev_week->at(k);
            if (d < 0) {
                plan.attitude_points.push_back(
                    "That is " + std::to_string(-d) + " fewer " +
                    std::string(kind_phrase(k)) + " events than last week; it is working.");
                break;
            }
        }
    }

    if (stats.total_events() == 0) {
        plan.norm_points.push_back(
            "Most drivers log a few rough events each week; your clean sheet puts you "
            "ahead of the pack.");
    } else if (!stats.events_per_100km.empty()) {
        for (EventKind k : kinds) {
            const double rate = stats.events_per_100km.at(k);
            const double peer = cfg.peer_rates.count(k) ? cfg.peer_rates.at(k) : 0.0;
            std::string cmp = rate > peer * 1.05   ? "above"
                              : rate < peer * 0.95 ? "below"
                                                   : "close to";
            plan.norm_points.push_back("Your " + std::string(kind_phrase(k)) +
                                       " rate of " + fmt1(rate) +
                                       " per 100 km is " + cmp +
                                       " what a typical driver here manages.");
        }
    } else {
        for (EventKind k : kinds)
            plan.norm_points.push_back(
                "Most drivers keep " + std::string(kind_phrase(k)) + " rare; you logged " +
                std::to_string(stats.events_by_kind.at(k)) + " this week.");
    }

    if (stats.total_events() == 0) {
        plan.control_points.push_back(
            "Keep doing what already works: smooth inputs, steady speeds, wide margins.");
    } else {
        for (EventKind k : kinds) {
            switch (k) {
                case EventKind::HarshAcceleration:
                    plan.control_points.push_back(
                        "Roll onto the accelerator over a slow breath and let the car "
                        "gather speed gradually.");
                    break;
                case EventKind::HarshBraking:
                    plan.control_points.push_back(
                        "Leave a longer following gap so you can brake early and gently "
                        "instead of late and hard.");
                    break;
                case EventKind::Speeding:
                    plan.control_points.push_back(
                        "Pick a cruising speed under the limit and glance at the "
                        "speedometer whenever the road opens up.");
                    break;
                case EventKind::Swerving:
                    plan.control_points.push_back(
                        "Slow before corners and steer in one smooth arc rather than "
                        "correcting sharply.");
                    break;
            }
        }
    }
    return plan;
}

std::string render_template_report(const ReportPlan& plan) {
    std::ostringstream out;
    out << "Weekly Driving Report\n\n";
    out << kAttitudeHeader << "\n";
    for (const auto& p : plan.attitude_points) out << "- " << p << "\n";
    out << "\n" << kNormHeader << "\n";
    for (const auto& p : plan.norm_points) out << "- " << p << "\n";
    out << "\n" << kControlHeader << "\n";
    for (const auto& p : plan.control_points) out << "- " << p << "\n";
    return out.str();
}

namespace {

std::string stats_block(const WeeklyStats& stats) {
    std::ostringstream out;
    out << kStatsBegin << "\n";
    out << "trips: " << stats.trips << "\n";
    out << "distance_km: " << fmt1(stats.distance_km) << "\n";
    out << "influenced_trips: " << stats.influenced_trips << "\n";
    for (EventKind k : kAllEventKinds) {
        out << to_string(k) << "_count: "
            << (stats.events_by_kind.count(k) ? stats.events_by_kind.at(k) : 0) << "\n";
        if (stats.events_per_100km.count(k))
            out << to_string(k) << "_rate_per100km: " << fmt1(stats.events_per_100km.at(k))
                << "\n";
    }
    if (stats.deltas_vs_prev_week)
        for (const auto& [kind, delta] : *stats.deltas_vs_prev_week)
            out << to_string(kind) << "_delta_vs_prev_week: " << delta << "\n";
    out << kStatsEnd << "\n";
    return out.str();
}

} // namespace

std::string build_draft_prompt(const WeeklyStats& stats, const ReportPlan& plan) {
    std::ostringstream p;
    p << kDraftPromptVersion << "\n"
      << "You are a supportive driving coach writing a weekly feedback report.\n"
      << "Write it so the driver feels the benefits of changing (attitudes), sees how\n"
      << "they compare with other drivers (norms), and knows concrete techniques they\n"
      << "control (control). Use exactly the three section headers shown in the plan.\n"
      << "Every number you write must appear in the statistics block; invent nothing.\n"
      << "Stay encouraging; never blame. Keep it under two hundred words.\n"
      << stats_block(stats) << kPlanBegin << "\n"
      << render_template_report(plan) << kPlanEnd << "\n";
    return p.str();
}

std::string build_refine_prompt(const std::string& draft, const WeeklyStats& stats,
                                bool corrective) {
    std::ostringstream p;
    p << kRefinePromptVersion << "\n"
      << "Revise the draft report below. Check every number against the statistics\n"
      << "block and replace any number that does not appear there with the correct\n"
      << "value. Keep the three section headers and the supportive tone. Return only\n"
      << "the revised report.\n";
    if (corrective)
        p << "The previous revision still contained numbers that are absent from the\n"
          << "statistics block or language that blames the driver. Fix every such\n"
          << "problem this time.\n";
    p << kDraftBegin << "\n" << draft << "\n" << kDraftEnd << "\n" << stats_block(stats);
    return p.str();
}

std::vector<Violation> check_consistency(std::string_view text, const WeeklyStats& stats,
                                         const std::vector<std::string>& banned_phrases) {
    std::vector<Violation> violations;

    std::vector<double> derivable{static_cast<double>(stats.trips),
                                  static_cast<double>(stats.influenced_trips),
                                  stats.distance_km,
                                  static_cast<double>(stats.total_events())};
    for (const auto& [kind, count] : stats.events_by_kind)
        derivable.push_back(static_cast<double>(count));
    for (const auto& [kind, rate] : stats.events_per_100km) derivable.push_back(rate);
    if (stats.deltas_vs_prev_week)
        for (const auto& [kind, delta] : *stats.deltas_vs_prev_week) {
            derivable.push_back(static_cast<double>(delta));
            derivable.push_back(std::fabs(static_cast<double>(delta)));
        }

    const std::string normalized = strip_rate_units(text);
    for (const std::string& tok : extract_number_tokens(normalized)) {
        const double v = std::strtod(tok.c_str(), nullptr);
        bool ok = false;
        for (double d : derivable) {
            if (std::fabs(v - d) <= 1e-9 || std::fabs(v - round1(d)) <= 1e-9) {
                ok = true;
                break;
            }
        }
        if (!ok) violations.push_back({Violation::Kind::Numeral, tok});
    }

    for (const std::string& phrase : banned_phrases)
        if (contains_phrase(text, phrase))
            violations.push_back({Violation::Kind::Tone, phrase});
    return violations;
}

FinalReport generate_report(GenerationBackend& backend, const ReportModelSpec& spec,
                            const WeeklyStats& stats, const ReportConfig& cfg) {
    const ReportPlan plan = plan_report(stats, cfg);

    FinalReport report;
    report.week_start_day = stats.week_start_day;
    report.driver_id = stats.driver_id;

    auto fallback = [&](std::size_t fixed, bool degraded) {
        report.text = render_template_report(plan);
        report.provenance = Provenance::Fallback;
        report.violations_fixed = fixed;
        report.degraded = degraded;
        return report;
    };

    // An empty week goes straight to the template; there is nothing for a
    // drafting model to elaborate on.
    if (stats.trips == 0) return fallback(0, false);

    try {
        const std::string draft =
            backend.generate(spec.draft_model_id, build_draft_prompt(stats, plan));

        std::string candidate =
            backend.generate(spec.refine_model_id, build_refine_prompt(draft, stats, false));
        auto v1 = check_consistency(candidate, stats, cfg.banned_phrases);
        if (v1.empty()) {
            report.text = std::move(candidate);
            report.provenance = Provenance::TwoStep;
            return report;
        }

        candidate = backend.generate(spec.refine_model_id,
                                     build_refine_prompt(candidate, stats, true));
        auto v2 = check_consistency(candidate, stats, cfg.banned_phrases);
        if (v2.empty()) {
            report.text = std::move(candidate);
            report.provenance = Provenance::TwoStep;
            report.violations_fixed = v1.size();
            return report;
        }
        return fallback(v2.size(), false);
    } catch (const BackendError&) {
        return fallback(0, true);
    }
}

} // namespace driveframe
