#pragma once

// JSON shapes of analysis and experiment reports. Rationals are written as
// {"num": "...", "den": "..."}; configurations as lists of item objects.

#include "incompat/catalog.hpp"
#include "incompat/compat.hpp"
#include "incompat/quantum.hpp"
#include "incompat/simulate.hpp"

#include <json.hpp>

namespace incompat {

nlohmann::json event_to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

nlohmann::json pstate_to_json(const MeasurementSystem& system, const PState& sigma);

nlohmann::json report_to_json(const MeasurementSystem& system, const CriterionReport& report);
CriterionReport report_from_json(const MeasurementSystem& system, const nlohmann::json& j);

nlohmann::json matrix_to_json(const MeasurementSystem& system, const CompatibilityMatrix& m);
nlohmann::json repeatability_to_json(const MeasurementSystem& system, const std::vector<RepeatabilityEntry>& entries);
nlohmann::json interference_to_json(const MeasurementSystem& system, const InterferenceRecord& rec);
nlohmann::json sharpness_to_json(const MeasurementSystem& system, const std::vector<SharpnessEntry>& entries);
nlohmann::json audit_to_json(const RelationAudit& audit);
nlohmann::json findings_to_json(const std::vector<Finding>& findings);
nlohmann::json monte_carlo_to_json(const MonteCarloResult& r);

nlohmann::json trial_to_json(const TrialReport& t);
TrialReport trial_from_json(const nlohmann::json& j);
nlohmann::json equivalence_to_json(const EquivalenceReport& r);
EquivalenceReport equivalence_from_json(const nlohmann::json& j);

}  // namespace incompat
