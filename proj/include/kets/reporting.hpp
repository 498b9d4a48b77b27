#ifndef KETS_REPORTING_HPP
#define KETS_REPORTING_HPP

#include <string>

#include "kets/experiment.hpp"

namespace kets {

struct ReportBundle {
    std::string metrics_csv;
    std::string trust_csv;
    std::string summary_json;
};

// Serialized view of every resolved config knob (what summary.json embeds).
std::string config_to_json(const ExperimentConfig& cfg);

std::string metrics_csv_text(const ExperimentResult& result);
std::string trust_csv_text(const ExperimentResult& result);
std::string summary_json_text(const ExperimentConfig& cfg, const ExperimentResult& result);

// Runs the experiment and writes metrics.csv, trust.csv and summary.json
// under out_dir (created if needed). Files are written to a temp name and
// renamed, so re-runs overwrite atomically.
ReportBundle run_and_report(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace kets

#endif  // KETS_REPORTING_HPP
