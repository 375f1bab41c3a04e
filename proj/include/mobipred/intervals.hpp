#pragma once

#include <string>
#include <vector>

#include "mobipred/dates.hpp"
#include "mobipred/diag.hpp"
#include "mobipred/fusion.hpp"
#include "mobipred/ingest.hpp"

namespace mobipred::intervals {

enum class Label { improved, not_improved, unlabeled };

std::string label_name(Label label);

// One questionnaire-aligned analysis unit: the 7 local calendar days ending
// on the fill-in day, with the minute-track slice covering those days.
struct QidsInterval {
    std::string user_id;
    EpochDay end_date = 0;
    int qids_score = 0;
    std::vector<fusion::MinutePoint> track_slice;
    int days_with_data = 0;
    std::size_t sample_count = 0;
    Label label = Label::unlabeled;
    int tz_offset_s = 0;

    EpochDay first_day() const { return end_date - 6; }
};

// Half-open label span (start_day, end_day] owned by one CGI assessment.
struct ImprovementPeriod {
    std::string user_id;
    EpochDay start_day = 0;  // exclusive: previous CGI date or enrollment
    EpochDay end_day = 0;    // inclusive: this CGI's date
    bool improved = false;
};

// Track slice covering local days [first_day, last_day], with coverage
// stats. qids_score and label are left at defaults.
QidsInterval slice_days(const fusion::MinuteTrack& track, EpochDay first_day, EpochDay last_day);

// One interval per non-baseline QIDS record, with coverage stats computed
// from the track slice.
std::vector<QidsInterval> build_qids_intervals(const fusion::MinuteTrack& track,
                                               const std::vector<ingest::QidsRecord>& qids);

struct CoverageResult {
    std::vector<QidsInterval> kept;
    std::vector<std::string> excluded_users;  // had intervals, kept none
};

// Keeps intervals with days_with_data >= min_days and sample_count >=
// min_samples (both inclusive).
CoverageResult apply_coverage_filter(std::vector<QidsInterval> intervals, int min_days = 5,
                                     std::size_t min_samples = 2000, DiagLog* diag = nullptr);

// Periods per CGI assessment: (previous CGI date or enrollment, cgi date],
// improved iff cgi_i <= 2. CGI records that do not advance the date are
// skipped with a diagnostic.
std::vector<ImprovementPeriod> build_improvement_periods(const std::string& user_id,
                                                         const std::vector<ingest::CgiRecord>& cgi,
                                                         EpochDay enrollment_day,
                                                         DiagLog* diag = nullptr);

// Assigns each interval the status of the period containing its end_date.
// Intervals outside every period (before enrollment or past the last CGI)
// are dropped with a diagnostic. Single-user input.
std::vector<QidsInterval> label_intervals(std::vector<QidsInterval> intervals,
                                          const std::vector<ingest::CgiRecord>& cgi,
                                          EpochDay enrollment_day, DiagLog* diag = nullptr);

}  // namespace mobipred::intervals
