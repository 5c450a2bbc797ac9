#pragma once

#include <json.hpp>

#include <optional>
#include <string>

#include "detmet/asymptotics.hpp"
#include "detmet/config.hpp"
#include "detmet/evaluation.hpp"
#include "detmet/types.hpp"

namespace detmet {

// JSON report builders. Every report carries the artifact name/version, the
// resolved configuration, the evaluation mode and the seeds, so two reports
// with identical embeds are guaranteed to hold identical numbers.

nlohmann::json estimate_to_json(const Estimate& e);
nlohmann::json metric_estimates_to_json(const MetricEstimates& estimates,
                                        const std::vector<std::string>& detector_names);

struct EstimateReportInputs {
    const LabelMatrix& matrix;
    const MetricEstimates& naive;
    const MetricEstimates& adjusted;
    ProbEval eval;
    std::optional<GroundTruth> truth;
};

/// Full `estimate` output: naive + adjusted sets, the vote probabilities and
/// agreement at the adjusted rates, and the asymptotic moments evaluated at
/// the adjusted parameter values.
nlohmann::json build_estimate_report(const EstimateReportInputs& in);

nlohmann::json experiment_report_to_json(const ExperimentReport& report);

/// Aggregate table: one row per (metric, detector, estimator kind).
std::string experiment_report_to_csv(const ExperimentReport& report);

/// Flat plot series: one row per (replicate, metric, detector, estimator
/// kind, value); needs the report built with keep_replicates.
std::string replicate_series_to_csv(const ExperimentReport& report);
std::string subset_reports_to_csv(const std::vector<SubsetReport>& reports,
                                  const std::vector<std::string>& detector_names);
nlohmann::json subset_reports_to_json(const std::vector<SubsetReport>& reports,
                                      const std::vector<std::string>& detector_names);

nlohmann::json artifact_stamp();
nlohmann::json config_echo_json(const RunConfig& config);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace detmet
