#include "flowids/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace flowids {

using nlohmann::json;

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

// JSON has no infinity; artifacts encode it as the string "inf".
json jnum(double v) {
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

json metric_set(const MetricSet& m) {
  return json{{"accuracy", jnum(m.accuracy)}, {"precision", jnum(m.precision)},
              {"recall", jnum(m.recall)},     {"f1", jnum(m.f1)},
              {"youden_j", jnum(m.youden_j)}, {"degenerate", m.degenerate}};
}

json counts(const ConfusionCounts& c) {
  return json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

}  // namespace

std::string metrics_to_json(const MetricsReport& r) {
  json j{{"packet", metric_set(r.packet)},
         {"flow", metric_set(r.flow)},
         {"packet_counts", counts(r.packet_counts)},
         {"flow_counts", counts(r.flow_counts)}};
  return j.dump(2) + "\n";
}

std::string metrics_to_csv(const MetricsReport& r) {
  std::ostringstream ss;
  ss << "level,accuracy,precision,recall,f1,youden_j,tp,fp,tn,fn\n";
  auto row = [&](const char* level, const MetricSet& m, const ConfusionCounts& c) {
    ss << level << ',' << fmt_double(m.accuracy) << ',' << fmt_double(m.precision) << ','
       << fmt_double(m.recall) << ',' << fmt_double(m.f1) << ',' << fmt_double(m.youden_j) << ','
       << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn << '\n';
  };
  row("packet", r.packet, r.packet_counts);
  row("flow", r.flow, r.flow_counts);
  return ss.str();
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
  std::ostringstream ss;
  ss << "epoch,loss,accuracy\n";
  for (const auto& e : history)
    ss << e.epoch << ',' << fmt_double(e.loss) << ',' << fmt_double(e.accuracy) << '\n';
  return ss.str();
}

std::string importance_to_csv(const ImportanceTable& t) {
  std::ostringstream ss;
  ss << "feature,name,score,stderr,method\n";
  for (const auto& e : t.entries)
    ss << e.feature << ',' << e.name << ',' << fmt_double(e.score) << ','
       << fmt_double(e.stderr_) << ',' << importance_method_name(t.method) << '\n';
  return ss.str();
}

std::string importance_to_json(const ImportanceTable& t) {
  json entries = json::array();
  for (const auto& e : t.entries)
    entries.push_back(json{{"feature", e.feature},
                           {"name", e.name},
                           {"score", jnum(e.score)},
                           {"stderr", jnum(e.stderr_)}});
  json j{{"method", importance_method_name(t.method)}, {"entries", entries}};
  return j.dump(2) + "\n";
}

std::string shared_info_to_json(const SharedInfoScore& s) {
  json j{{"feature_i", s.feature_i},
         {"feature_j", s.feature_j},
         {"defined", s.defined},
         {"score", s.defined ? jnum(s.score) : json(nullptr)},
         {"acc_base", jnum(s.acc_base)},
         {"acc_without_i", jnum(s.acc_without_i)},
         {"acc_without_j", jnum(s.acc_without_j)},
         {"acc_without_both", jnum(s.acc_without_both)}};
  return j.dump(2) + "\n";
}

std::string pdp_to_csv(const PDPCurve& c) {
  std::ostringstream ss;
  ss << "feature,condition,step,value,mean,min,max,flows\n";
  for (const auto& p : c.points) {
    ss << c.feature_name << ',' << c.condition << ',';
    if (c.step) ss << *c.step;
    ss << ',' << fmt_double(p.value) << ',' << fmt_double(p.mean) << ',' << fmt_double(p.min)
       << ',' << fmt_double(p.max) << ',' << c.flows_used << '\n';
  }
  return ss.str();
}

std::string pdp_to_json(const PDPCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points)
    pts.push_back(json{{"value", jnum(p.value)},
                       {"mean", jnum(p.mean)},
                       {"min", jnum(p.min)},
                       {"max", jnum(p.max)}});
  json j{{"feature", c.feature},
         {"feature_name", c.feature_name},
         {"condition", c.condition},
         {"flows_used", c.flows_used},
         {"points", pts}};
  if (c.step) j["step"] = *c.step;
  return j.dump(2) + "\n";
}

std::string confidence_to_csv(const std::vector<StepConfidence>& v) {
  std::ostringstream ss;
  ss << "step,mean_confidence,count\n";
  for (const auto& s : v)
    ss << s.step << ',' << fmt_double(s.mean_confidence) << ',' << s.count << '\n';
  return ss.str();
}

std::string profile_to_csv(const std::vector<StepProfile>& v, const std::string& feature_name) {
  std::ostringstream ss;
  ss << "feature,step,mean,std,count\n";
  for (const auto& s : v)
    ss << feature_name << ',' << s.step << ',' << fmt_double(s.mean) << ','
       << fmt_double(s.stddev) << ',' << s.count << '\n';
  return ss.str();
}

std::string confidence_to_json(const std::vector<StepConfidence>& v) {
  json steps = json::array();
  for (const auto& s : v)
    steps.push_back(json{{"step", s.step},
                         {"mean_confidence", jnum(s.mean_confidence)},
                         {"count", s.count}});
  return json{{"steps", steps}}.dump(2) + "\n";
}

std::string profile_to_json(const std::vector<StepProfile>& v, const std::string& feature_name) {
  json steps = json::array();
  for (const auto& s : v)
    steps.push_back(json{{"step", s.step},
                         {"mean", jnum(s.mean)},
                         {"std", jnum(s.stddev)},
                         {"count", s.count}});
  return json{{"feature", feature_name}, {"steps", steps}}.dump(2) + "\n";
}

std::string attack_rows_to_csv(const AttackEvaluation& e, AttackMethod method) {
  std::ostringstream ss;
  ss << "flow_index,flow_id,attack_type,method,detected_unmodified,detected_adversarial,"
        "success,l1,linf,iterations\n";
  for (const auto& r : e.rows)
    ss << r.flow_index << ',' << r.flow_id << ',' << r.attack_type << ','
       << attack_method_name(method) << ',' << (r.detected_unmodified ? 1 : 0) << ','
       << (r.detected_adversarial ? 1 : 0) << ',' << (r.success ? 1 : 0) << ','
       << fmt_double(r.l1) << ',' << fmt_double(r.linf) << ',' << r.iterations << '\n';
  return ss.str();
}

namespace {

json type_summary(const AttackTypeSummary& s) {
  return json{{"attack_type", s.attack_type},
              {"n", s.n},
              {"detection_accuracy_unmodified", jnum(s.detection_accuracy_unmodified)},
              {"detection_accuracy_adversarial", jnum(s.detection_accuracy_adversarial)},
              {"success_ratio", jnum(s.success_ratio)},
              {"mean_l1", jnum(s.mean_l1)},
              {"median_l1", jnum(s.median_l1)},
              {"mean_linf", jnum(s.mean_linf)},
              {"median_linf", jnum(s.median_linf)}};
}

}  // namespace

std::string attack_summary_to_json(const AttackEvaluation& e, AttackMethod method) {
  json per_type = json::array();
  for (const auto& s : e.per_type) per_type.push_back(type_summary(s));
  json j{{"method", attack_method_name(method)},
         {"overall", type_summary(e.overall)},
         {"per_type", per_type}};
  return j.dump(2) + "\n";
}

std::string ars_report_to_json(const RobustnessReport& r) {
  json dist = json::array();
  for (double d : r.distances) dist.push_back(jnum(d));
  json rounds = json::array();
  for (const auto& rd : r.rounds)
    rounds.push_back(json{{"round", rd.round},
                          {"kappa", jnum(rd.kappa)},
                          {"adversarial", rd.adversarial},
                          {"candidate_ars", jnum(rd.candidate_ars)}});
  json j{{"ars", jnum(r.ars)},
         {"samples", r.samples},
         {"adversarial_ratio", jnum(r.adversarial_ratio)},
         {"iterations", r.iterations},
         {"distances", dist},
         {"rounds", rounds}};
  return j.dump(2) + "\n";
}

std::string ars_trace_to_csv(const RobustnessReport& r) {
  std::ostringstream ss;
  ss << "round,kappa,adversarial,candidate_ars\n";
  for (const auto& rd : r.rounds)
    ss << rd.round << ',' << fmt_double(rd.kappa) << ',' << rd.adversarial << ','
       << fmt_double(rd.candidate_ars) << '\n';
  return ss.str();
}

std::string advtrain_trajectory_to_csv(const AdvTrainResult& r) {
  std::ostringstream ss;
  ss << "cycle,kappa_reached,ars,adversarial_ratio\n";
  for (const auto& p : r.trajectory)
    ss << p.cycle << ',' << fmt_double(p.kappa_reached) << ',' << fmt_double(p.ars) << ','
       << fmt_double(p.adversarial_ratio) << '\n';
  return ss.str();
}

}  // namespace flowids
