#include "flowids/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "flowids/util.hpp"

namespace flowids {

namespace {

// Slack between the internal success test and delta, so that the
// denormalize/renormalize round trip of the returned flow can never move a
// successful sample back across the margin.
constexpr double kSuccessGuard = 1e-9;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::size_t AttackConstraints::editable_count() const {
  std::size_t n = 0;
  for (auto e : editable) n += e ? 1 : 0;
  return n;
}

AttackConstraints derive_constraints(const Model& model, const Flow& flow) {
  if (model.feature_dropout)
    throw ConfigError("attacks target models with the regular input encoding");
  const auto& schema = model.schema;
  const auto active = schema.active_indices();

  AttackConstraints c;
  c.original = flow_to_input(flow, schema, model.stats, false, {});
  c.steps = c.original.rows;
  c.width = c.original.cols;
  c.editable.assign(c.steps * c.width, 0);

  for (std::size_t t = 0; t < c.steps; ++t) {
    const auto& p = flow.packets[t];
    const bool attacker_side = flow.fully_controlled || p.forward();
    const bool zeroed =
        schema.reduction == Reduction::kAttackerDirectionOnly && p.forward();
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto j = static_cast<std::size_t>(active[k]);
      if (schema.manipulable[j] && attacker_side && !zeroed)
        c.editable[t * c.width + k] = 1;
    }
  }
  return c;
}

Matrix project_constraints(const AttackConstraints& constraints, Matrix candidate) {
  if (candidate.rows != constraints.steps || candidate.cols != constraints.width)
    throw DataError("project_constraints: shape mismatch");
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const double orig = constraints.original.d[i];
    if (constraints.editable[i])
      candidate.d[i] = std::max(candidate.d[i], orig);
    else
      candidate.d[i] = orig;
  }
  return candidate;
}

double l1_distance(const AttackConstraints& c, const Matrix& adv) {
  double d = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i)
    if (c.editable[i]) d += std::abs(adv.d[i] - c.original.d[i]);
  return d;
}

double linf_distance(const AttackConstraints& c, const Matrix& adv) {
  double d = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i)
    if (c.editable[i]) d = std::max(d, std::abs(adv.d[i] - c.original.d[i]));
  return d;
}

Flow reconstruct_flow(const Model& model, const Flow& original,
                      const AttackConstraints& constraints, const Matrix& adv_input) {
  const auto active = model.schema.active_indices();
  Flow out = original;
  for (std::size_t t = 0; t < constraints.steps; ++t)
    for (std::size_t k = 0; k < constraints.width; ++k) {
      if (!constraints.editable[t * constraints.width + k]) continue;
      const auto j = static_cast<std::size_t>(active[k]);
      const double raw =
          adv_input.at(t, k) * model.stats.std[j] + model.stats.mean[j];
      // never below the original raw value, so re-normalizing stays feasible
      out.packets[t][active[k]] = std::max(raw, original.packets[t][active[k]]);
    }
  return out;
}

namespace {

struct EvaluatedCandidate {
  double logit = 0.0;
};

// Finalize a result: rebuild the flow from the chosen tensor (the best
// successful iterate, or the attempt when nothing succeeded), re-derive
// its input and re-check success so the reported numbers hold for the
// artifact a consumer sees, not just the internal iterate.
AdversarialResult finalize(const Model& model, const Flow& flow,
                           const AttackConstraints& constraints, double delta,
                           const std::optional<Matrix>& best, const Matrix& last,
                           std::size_t iterations) {
  AdversarialResult res;
  res.iterations = iterations;
  res.attempted_l1 = l1_distance(constraints, best ? *best : last);
  Flow adv = reconstruct_flow(model, flow, constraints, best ? *best : last);
  const Matrix re_input = flow_to_input(adv, model.schema, model.stats, false, {});
  const ForwardTrace tr = forward(model.params, re_input);
  res.adv_flow = std::move(adv);
  if (best && tr.logits.back() < delta) {
    res.success = true;
    res.l1 = l1_distance(constraints, re_input);
    res.linf = linf_distance(constraints, re_input);
  } else {
    res.success = false;
    res.l1 = std::numeric_limits<double>::infinity();
    res.linf = linf_distance(constraints, re_input);
  }
  return res;
}

void require_attack_flow(const Flow& flow) {
  if (!flow.is_attack())
    throw DataError("attack defined on attack-labeled flows only");
}

// Distance polish on a successful iterate: slide along the decision
// surface toward the original. Below the margin, the L1 descent direction
// is projected onto the logit's tangent plane (first-order z-preserving);
// above it, a normalized descent step restores feasibility. Plain
// oscillating gradient descent performs the same slide orders of magnitude
// more slowly.
Matrix polish_distance(const Model& model, const AttackConstraints& constraints, Matrix x,
                       double delta, std::size_t iters) {
  double eta = 0.04;
  Matrix best = x;
  double best_l1 = l1_distance(constraints, x);
  if (best_l1 == 0.0) return best;

  for (std::size_t k = 0; k < iters; ++k) {
    const ForwardTrace trace = forward(model.params, x);
    const double z = trace.logits.back();
    const Matrix grad = backward_inputs(model.params, trace, GradObjective::final_logit());

    if (z <= delta - kSuccessGuard) {
      const double d = l1_distance(constraints, x);
      if (d < best_l1) {
        best_l1 = d;
        best = x;
      }
      eta = std::min(eta * 1.12, 0.04);
      double sg = 0.0, gg = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!constraints.editable[i]) continue;
        const double s = x.d[i] > constraints.original.d[i] ? 1.0 : 0.0;
        sg += s * grad.d[i];
        gg += grad.d[i] * grad.d[i];
      }
      const double lambda = gg > 0.0 ? sg / gg : 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!constraints.editable[i]) continue;
        const double s = x.d[i] > constraints.original.d[i] ? 1.0 : 0.0;
        x.d[i] += eta * (-s + lambda * grad.d[i]);
      }
    } else {
      // fell off the margin: shrink the trust region and step back down
      eta = std::max(eta * 0.5, 5e-4);
      double ginf = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (constraints.editable[i]) ginf = std::max(ginf, std::abs(grad.d[i]));
      if (ginf == 0.0) break;
      const double back = std::max(eta, 0.01);
      for (std::size_t i = 0; i < x.size(); ++i)
        if (constraints.editable[i]) x.d[i] -= back * grad.d[i] / ginf;
    }
    x = project_constraints(constraints, std::move(x));
  }
  return best;
}

}  // namespace

// The inverse scaling exists to tame large kappa-weighted gradient steps;
// below the base tradeoff nothing needs taming, so the budget floors at
// the base values.
double CWConfig::scaled_lr() const {
  return kappa <= base_kappa ? base_lr : base_lr * (base_kappa / kappa);
}

std::size_t CWConfig::scaled_iters() const {
  if (kappa <= base_kappa) return base_iters;
  const double scaled =
      std::round(static_cast<double>(base_iters) * (kappa / base_kappa));
  return std::max<std::size_t>(
      1, std::min<std::size_t>(max_iters, static_cast<std::size_t>(scaled)));
}

AdversarialResult cw_attack(const Model& model, const Flow& flow, const CWConfig& config) {
  require_attack_flow(flow);
  if (config.kappa <= 0.0) throw ConfigError("cw_attack: kappa must be > 0");

  const AttackConstraints constraints = derive_constraints(model, flow);
  const double lr = config.scaled_lr();
  const bool frozen = constraints.editable_count() == 0;
  const std::size_t restarts = frozen ? 1 : std::max<std::size_t>(1, config.restarts);
  const std::size_t iters_per_start =
      std::max<std::size_t>(1, config.scaled_iters() / restarts);

  // per-restart best iterates; each gets a slice of the polish budget, so
  // the winning basin is chosen on polished distances
  std::vector<std::pair<double, Matrix>> candidates;
  Matrix deepest = constraints.original;
  double deepest_l1 = 0.0;
  std::size_t used = 0;
  bool zero_hit = false;
  Rng rng(config.seed);

  for (std::size_t r = 0; r < restarts && !zero_hit; ++r) {
    Matrix x = constraints.original;
    if (r > 0) {
      const double spread = config.restart_spread * static_cast<double>(r);
      for (std::size_t i = 0; i < x.size(); ++i)
        if (constraints.editable[i]) x.d[i] += spread * rng.uniform();
    }
    double local_l1 = std::numeric_limits<double>::infinity();
    std::optional<Matrix> local;
    for (std::size_t it = 0;; ++it) {
      const ForwardTrace trace = forward(model.params, x);
      const double z = trace.logits.back();
      if (z <= config.delta - kSuccessGuard) {
        const double d = l1_distance(constraints, x);
        if (d < local_l1) {
          local_l1 = d;
          local = x;
        }
        if (d == 0.0) zero_hit = true;
      }
      if (it >= iters_per_start || frozen || zero_hit) {
        used += it;
        break;
      }
      // the scaled rate tames the kappa-weighted logit term; once the
      // margin is met that term is flat and the distance pull runs at the
      // base rate
      const bool margin_active = z > config.delta;
      const double step_lr = margin_active ? lr : config.base_lr;
      Matrix grad(0, 0);
      if (margin_active)
        grad = backward_inputs(model.params, trace, GradObjective::final_logit());
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!constraints.editable[i]) continue;
        double g = sgn(x.d[i] - constraints.original.d[i]);
        if (margin_active) g += config.kappa * grad.d[i];
        x.d[i] -= step_lr * g;
      }
      x = project_constraints(constraints, std::move(x));
    }
    if (local) candidates.emplace_back(local_l1, std::move(*local));
    const double reached = l1_distance(constraints, x);
    if (reached >= deepest_l1) {
      deepest_l1 = reached;
      deepest = x;
    }
  }

  std::optional<Matrix> best;
  double best_l1 = std::numeric_limits<double>::infinity();
  const std::size_t slice =
      candidates.empty() ? 0 : std::max<std::size_t>(1, config.polish_iters / candidates.size());
  for (auto& [raw_l1, cand] : candidates) {
    double d = raw_l1;
    Matrix polished = cand;
    if (d > 0.0) {
      polished = polish_distance(model, constraints, std::move(polished), config.delta, slice);
      d = l1_distance(constraints, polished);
    }
    if (d < best_l1) {
      best_l1 = d;
      best = std::move(polished);
    }
  }
  return finalize(model, flow, constraints, config.delta, best, deepest, used);
}

AdversarialResult pgd_linf_attack(const Model& model, const Flow& flow, const PGDConfig& config) {
  require_attack_flow(flow);
  if (config.epsilon < 0.0) throw DataError("pgd_linf_attack: epsilon must be >= 0");

  const AttackConstraints constraints = derive_constraints(model, flow);
  const double step = config.step > 0.0 ? config.step : config.epsilon / 10.0;

  auto project_ball = [&](Matrix m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double orig = constraints.original.d[i];
      if (constraints.editable[i])
        m.d[i] = std::clamp(m.d[i], orig, orig + config.epsilon);
      else
        m.d[i] = orig;
    }
    return m;
  };

  const std::vector<double> labels(constraints.steps, 1.0); // attack label
  std::optional<Matrix> best;
  double best_l1 = std::numeric_limits<double>::infinity();

  const bool frozen = constraints.editable_count() == 0 || config.epsilon == 0.0;
  const std::size_t restarts = frozen ? 1 : std::max<std::size_t>(1, config.restarts);
  std::size_t used = 0;
  Matrix deepest = constraints.original;
  double deepest_l1 = 0.0;
  Rng rng(config.seed);

  for (std::size_t r = 0; r < restarts; ++r) {
    Matrix x = constraints.original;
    if (r > 0)
      for (std::size_t i = 0; i < x.size(); ++i)
        if (constraints.editable[i]) x.d[i] += config.epsilon * rng.uniform();
    for (std::size_t it = 0;; ++it) {
      const ForwardTrace trace = forward(model.params, x);
      if (trace.logits.back() <= config.delta - kSuccessGuard) {
        const double d = l1_distance(constraints, x);
        if (d < best_l1) {
          best_l1 = d;
          best = x;
        }
      }
      if (it >= config.iters || frozen) {
        used += it;
        break;
      }
      const Matrix grad = backward_inputs(model.params, trace,
                                          GradObjective::loss(labels));
      for (std::size_t i = 0; i < x.size(); ++i)
        if (constraints.editable[i]) x.d[i] += step * sgn(grad.d[i]);
      x = project_ball(std::move(x));
    }
    const double reached = l1_distance(constraints, x);
    if (reached >= deepest_l1) {
      deepest_l1 = reached;
      deepest = x;
    }
  }
  return finalize(model, flow, constraints, config.delta, best, deepest, used);
}

AdversarialResult fgsm_attack(const Model& model, const Flow& flow, double epsilon,
                              double delta) {
  require_attack_flow(flow);
  if (epsilon < 0.0) throw DataError("fgsm_attack: epsilon must be >= 0");

  const AttackConstraints constraints = derive_constraints(model, flow);
  const std::vector<double> labels(constraints.steps, 1.0);

  Matrix x = constraints.original;
  if (epsilon > 0.0 && constraints.editable_count() > 0) {
    const ForwardTrace trace = forward(model.params, x);
    const Matrix grad = backward_inputs(model.params, trace, GradObjective::loss(labels));
    for (std::size_t i = 0; i < x.size(); ++i)
      if (constraints.editable[i]) x.d[i] += epsilon * sgn(grad.d[i]);
    x = project_constraints(constraints, std::move(x));
  }
  const ForwardTrace after = forward(model.params, x);
  std::optional<Matrix> best;
  if (after.logits.back() <= delta - kSuccessGuard) best = x;
  return finalize(model, flow, constraints, delta, best, x, epsilon > 0.0 ? 1 : 0);
}

const char* attack_method_name(AttackMethod m) {
  switch (m) {
    case AttackMethod::kCW: return "cw";
    case AttackMethod::kPGD: return "pgd";
    case AttackMethod::kFGSM: return "fgsm";
  }
  return "?";
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

AttackTypeSummary summarize(const std::string& type, const std::vector<const PerFlowAttackRow*>& rows) {
  AttackTypeSummary s;
  s.attack_type = type;
  s.n = rows.size();
  std::size_t detected = 0, success = 0, detected_adv = 0;
  std::vector<double> l1s, linfs;
  for (const auto* r : rows) {
    detected += r->detected_unmodified ? 1 : 0;
    detected_adv += r->detected_adversarial ? 1 : 0;
    success += r->success ? 1 : 0;
    if (r->success) {
      l1s.push_back(r->l1);
      linfs.push_back(r->linf);
    }
  }
  const double n = static_cast<double>(s.n);
  s.detection_accuracy_unmodified = detected / n;
  s.detection_accuracy_adversarial = detected_adv / n;
  s.success_ratio = success / n;
  if (!l1s.empty()) {
    double sum = 0.0, sumi = 0.0;
    for (double v : l1s) sum += v;
    for (double v : linfs) sumi += v;
    s.mean_l1 = sum / static_cast<double>(l1s.size());
    s.mean_linf = sumi / static_cast<double>(linfs.size());
    s.median_l1 = median_of(l1s);
    s.median_linf = median_of(linfs);
  }
  return s;
}

}  // namespace

AttackEvaluation evaluate_attack(const Model& model, const Dataset& data,
                                 const AttackSettings& settings) {
  std::vector<std::size_t> attack_idx;
  for (std::size_t i = 0; i < data.flows.size(); ++i)
    if (data.flows[i].is_attack()) attack_idx.push_back(i);
  if (attack_idx.empty()) throw DataError("evaluate_attack: no attack flows");

  AttackEvaluation ev;
  ev.rows.resize(attack_idx.size());
  ev.results.resize(attack_idx.size());

  parallel_for(attack_idx.size(), settings.threads, [&](std::size_t i) {
    const Flow& fl = data.flows[attack_idx[i]];
    AdversarialResult res;
    switch (settings.method) {
      case AttackMethod::kCW: res = cw_attack(model, fl, settings.cw); break;
      case AttackMethod::kPGD: res = pgd_linf_attack(model, fl, settings.pgd); break;
      case AttackMethod::kFGSM:
        res = fgsm_attack(model, fl, settings.fgsm_epsilon, settings.cw.delta);
        break;
    }
    PerFlowAttackRow row;
    row.flow_index = attack_idx[i];
    row.flow_id = fl.key.to_string();
    row.attack_type = fl.attack_type;
    row.detected_unmodified = predict_flow(model, fl).flow_attack;
    row.detected_adversarial = predict_flow(model, res.adv_flow).flow_attack;
    row.success = res.success;
    row.l1 = res.l1;
    row.linf = res.linf;
    row.iterations = res.iterations;
    ev.rows[i] = std::move(row);
    ev.results[i] = std::move(res);
  });

  std::map<std::string, std::vector<const PerFlowAttackRow*>> by_type;
  std::vector<const PerFlowAttackRow*> all;
  for (const auto& r : ev.rows) {
    by_type[r.attack_type].push_back(&r);
    all.push_back(&r);
  }
  for (const auto& [type, rows] : by_type) ev.per_type.push_back(summarize(type, rows));
  ev.overall = summarize("all", all);
  return ev;
}

}  // namespace flowids
