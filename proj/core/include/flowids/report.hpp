#pragma once

#include <string>
#include <vector>

#include "flowids/attacks.hpp"
#include "flowids/classifier.hpp"
#include "flowids/defenses.hpp"
#include "flowids/explain.hpp"
#include "flowids/robustness.hpp"

namespace flowids {

/// All artifact writers produce deterministic bytes: fixed column orders,
/// shortest round-trip float formatting, no timestamps.

std::string metrics_to_json(const MetricsReport& r);
std::string metrics_to_csv(const MetricsReport& r);
std::string history_to_csv(const std::vector<EpochStats>& history);

std::string importance_to_csv(const ImportanceTable& t);
std::string importance_to_json(const ImportanceTable& t);
std::string shared_info_to_json(const SharedInfoScore& s);

std::string pdp_to_csv(const PDPCurve& c);
std::string pdp_to_json(const PDPCurve& c);
std::string confidence_to_csv(const std::vector<StepConfidence>& v);
std::string confidence_to_json(const std::vector<StepConfidence>& v);
std::string profile_to_csv(const std::vector<StepProfile>& v, const std::string& feature_name);
std::string profile_to_json(const std::vector<StepProfile>& v, const std::string& feature_name);

std::string attack_rows_to_csv(const AttackEvaluation& e, AttackMethod method);
std::string attack_summary_to_json(const AttackEvaluation& e, AttackMethod method);

std::string ars_report_to_json(const RobustnessReport& r);
std::string ars_trace_to_csv(const RobustnessReport& r);

std::string advtrain_trajectory_to_csv(const AdvTrainResult& r);

/// Canonical double formatting shared by the CSV writers.
std::string fmt_double(double v);

}  // namespace flowids
