#include "mobipred/intervals.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace mobipred::intervals {

std::string label_name(Label label) {
    switch (label) {
        case Label::improved: return "improved";
        case Label::not_improved: return "not_improved";
        default: return "unlabeled";
    }
}

QidsInterval slice_days(const fusion::MinuteTrack& track, EpochDay first_day, EpochDay last_day) {
    QidsInterval iv;
    iv.user_id = track.user_id;
    iv.end_date = last_day;
    iv.tz_offset_s = track.tz_offset_s;

    // Local days [first_day, last_day] as a UTC instant range, half-open.
    EpochSeconds lo = static_cast<EpochSeconds>(first_day) * kSecondsPerDay - track.tz_offset_s;
    EpochSeconds hi =
        static_cast<EpochSeconds>(last_day + 1) * kSecondsPerDay - track.tz_offset_s;
    auto first = std::lower_bound(
        track.points.begin(), track.points.end(), lo,
        [](const fusion::MinutePoint& p, EpochSeconds t) { return p.minute < t; });
    auto last = std::lower_bound(
        first, track.points.end(), hi,
        [](const fusion::MinutePoint& p, EpochSeconds t) { return p.minute < t; });
    iv.track_slice.assign(first, last);
    iv.sample_count = iv.track_slice.size();

    EpochDay prev = 0;
    bool have = false;
    for (const auto& p : iv.track_slice) {
        EpochDay d = local_day(p.minute, track.tz_offset_s);
        if (!have || d != prev) {
            iv.days_with_data += 1;
            prev = d;
            have = true;
        }
    }
    return iv;
}

std::vector<QidsInterval> build_qids_intervals(const fusion::MinuteTrack& track,
                                               const std::vector<ingest::QidsRecord>& qids) {
    std::vector<QidsInterval> out;
    for (const auto& q : qids) {
        if (q.is_baseline) continue;
        QidsInterval iv = slice_days(track, q.date - 6, q.date);
        iv.user_id = q.user_id;
        iv.qids_score = q.score;
        out.push_back(std::move(iv));
    }
    return out;
}

CoverageResult apply_coverage_filter(std::vector<QidsInterval> intervals, int min_days,
                                     std::size_t min_samples, DiagLog* diag) {
    CoverageResult r;
    std::map<std::string, int> seen, kept;
    for (auto& iv : intervals) {
        seen[iv.user_id] += 1;
        if (iv.days_with_data >= min_days && iv.sample_count >= min_samples) {
            kept[iv.user_id] += 1;
            r.kept.push_back(std::move(iv));
        } else if (diag) {
            diag->exclude("interval_coverage", iv.user_id,
                          "end_date=" + format_iso_date(iv.end_date) +
                              " days=" + std::to_string(iv.days_with_data) +
                              " samples=" + std::to_string(iv.sample_count));
        }
    }
    for (const auto& [user, n] : seen) {
        if (kept[user] == 0) {
            r.excluded_users.push_back(user);
            if (diag)
                diag->exclude("user_coverage", user,
                              "all " + std::to_string(n) + " intervals below thresholds");
        }
    }
    return r;
}

std::vector<ImprovementPeriod> build_improvement_periods(const std::string& user_id,
                                                         const std::vector<ingest::CgiRecord>& cgi,
                                                         EpochDay enrollment_day, DiagLog* diag) {
    std::vector<ImprovementPeriod> periods;
    EpochDay prev = enrollment_day;
    for (const auto& c : cgi) {
        if (c.date <= prev) {
            if (diag)
                diag->note("cgi_skipped", "user=" + user_id + " date=" + format_iso_date(c.date) +
                                              " does not advance the period");
            continue;
        }
        periods.push_back({user_id, prev, c.date, c.cgi_i <= 2});
        prev = c.date;
    }
    return periods;
}

std::vector<QidsInterval> label_intervals(std::vector<QidsInterval> intervals,
                                          const std::vector<ingest::CgiRecord>& cgi,
                                          EpochDay enrollment_day, DiagLog* diag) {
    std::string user = intervals.empty() ? (cgi.empty() ? "" : cgi.front().user_id)
                                         : intervals.front().user_id;
    auto periods = build_improvement_periods(user, cgi, enrollment_day, diag);

    std::vector<QidsInterval> out;
    for (auto& iv : intervals) {
        iv.label = Label::unlabeled;
        for (const auto& p : periods) {
            if (iv.end_date > p.start_day && iv.end_date <= p.end_day) {
                iv.label = p.improved ? Label::improved : Label::not_improved;
                break;
            }
        }
        if (iv.label == Label::unlabeled) {
            if (diag)
                diag->exclude("interval_unlabeled", iv.user_id,
                              "end_date=" + format_iso_date(iv.end_date) +
                                  " outside every improvement period");
            continue;
        }
        out.push_back(std::move(iv));
    }
    return out;
}

}  // namespace mobipred::intervals
