#pragma once

// Run report JSON (layout published in docs/run_report.schema.json) and the
// one-line run summary.

#include <string>

#include <json.hpp>

#include "mcal/orchestrator.hpp"

namespace mcal {

nlohmann::json build_run_report(const MCALConfig& config, const Dataset& dataset, const MCALResult& result);

/// Checks the report against the published schema. Throws SchemaViolation
/// with the JSON path of the first offending value.
void validate_run_report(const nlohmann::json& report);

/// `dataset,learner,|B|/|X|,|S|/|X|,measured_error,total_cost,human_only_cost`
std::string summary_row(const Dataset& dataset, const MCALResult& result);

/// Pretty-printed with a trailing newline. Throws IoError.
void write_json(const nlohmann::json& doc, const std::string& path);

}  // namespace mcal
