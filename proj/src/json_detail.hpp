#pragma once
// Internal: ordered_json builders shared between metrics and runner output.

#include <json.hpp>

#include "fairlr/metrics.hpp"

namespace fairlr {

nlohmann::ordered_json fairness_report_to_json(const FairnessReport& r);
nlohmann::ordered_json aggregate_report_to_json(const AggregateReport& a);

}  // namespace fairlr
