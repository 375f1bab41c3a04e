#pragma once

#include <string>
#include <vector>

namespace mobipred {

// Collects exclusion and anomaly records produced along the pipeline. Each
// excluded user or interval gets exactly one line with a reason code.
class DiagLog {
  public:
    void exclude(const std::string& reason_code, const std::string& subject,
                 const std::string& detail = "") {
        std::string line = "EXCLUDE " + reason_code + " subject=" + subject;
        if (!detail.empty()) line += " " + detail;
        lines_.push_back(line);
    }

    void note(const std::string& code, const std::string& detail) {
        lines_.push_back("NOTE " + code + " " + detail);
    }

    const std::vector<std::string>& lines() const { return lines_; }
    bool empty() const { return lines_.empty(); }

  private:
    std::vector<std::string> lines_;
};

}  // namespace mobipred
