#include "flowids/defenses.hpp"

#include <algorithm>
#include <cmath>

#include "flowids/util.hpp"

namespace flowids {

FeatureSchema reduce_features(const FeatureSchema& schema, ReductionMode mode) {
  FeatureSchema reduced = schema;
  switch (mode) {
    case ReductionMode::kBothDirections:
      for (std::size_t j = 0; j < reduced.names.size(); ++j)
        if (reduced.manipulable[j]) reduced.active[j] = false;
      reduced.reduction = Reduction::kBothDirections;
      break;
    case ReductionMode::kAttackerDirectionOnly:
      reduced.reduction = Reduction::kAttackerDirectionOnly;
      break;
    default:
      throw ConfigError("reduce_features: unknown mode");
  }
  return reduced;
}

namespace {

struct Counterpart {
  std::size_t source;     // index into the training set
  AttackConstraints constraints;
  Matrix tensor;          // current adversarial iterate, normalized
  Flow flow;              // reconstructed, constraint-satisfying
};

// refresh_iters projected gradient-descent iterations on the CW objective,
// warm-started from the counterpart's previous state.
void refresh_counterpart(const Model& model, const Flow& source, Counterpart& cp,
                         const AdvTrainConfig& cfg) {
  for (std::uint32_t it = 0; it < cfg.refresh_iters; ++it) {
    const ForwardTrace trace = forward(model.params, cp.tensor);
    const double z = trace.logits.back();
    Matrix grad(0, 0);
    if (z > cfg.delta)
      grad = backward_inputs(model.params, trace, GradObjective::final_logit());
    for (std::size_t i = 0; i < cp.tensor.size(); ++i) {
      if (!cp.constraints.editable[i]) continue;
      double g = cp.tensor.d[i] - cp.constraints.original.d[i] > 0.0 ? 1.0 : 0.0;
      if (z > cfg.delta) g += cfg.kappa * grad.d[i];
      cp.tensor.d[i] -= cfg.refresh_lr * g;
    }
    cp.tensor = project_constraints(cp.constraints, std::move(cp.tensor));
  }
  cp.flow = reconstruct_flow(model, source, cp.constraints, cp.tensor);
  cp.flow.label = Label::kAttack; // counterparts train as additional attacks
}

}  // namespace

AdvTrainResult adversarial_training(const Dataset& train_data, const Dataset& test_data,
                                    const NormalizationStats& stats,
                                    const AdvTrainConfig& config) {
  std::vector<std::size_t> attack_idx;
  for (std::size_t i = 0; i < train_data.flows.size(); ++i)
    if (train_data.flows[i].is_attack()) attack_idx.push_back(i);
  if (attack_idx.empty()) throw DataError("adversarial_training: no attack flows");

  AdvTrainResult result;

  // baseline model
  TrainConfig base_cfg = config.train;
  base_cfg.epochs = config.baseline_epochs;
  result.baseline = train(train_data, stats, base_cfg).model;
  result.baseline_metrics = evaluate(result.baseline, test_data);

  // fixed held-out attack subset for the ARS trajectory
  std::vector<Flow> held_out;
  {
    std::vector<std::size_t> test_attacks;
    for (std::size_t i = 0; i < test_data.flows.size(); ++i)
      if (test_data.flows[i].is_attack()) test_attacks.push_back(i);
    Rng rng(config.train.seed ^ 0xa45a11ull);
    rng.shuffle(test_attacks);
    const std::size_t n = std::min(config.ars_samples, test_attacks.size());
    for (std::size_t i = 0; i < n; ++i) held_out.push_back(test_data.flows[test_attacks[i]]);
  }
  if (held_out.empty()) throw DataError("adversarial_training: no held-out attack flows");

  auto record_ars = [&](const Model& m, std::uint32_t cycle) {
    const RobustnessReport rep = compute_ars(m, held_out, config.ars);
    AdvTrainCyclePoint pt;
    pt.cycle = cycle;
    pt.kappa_reached = rep.rounds.empty() ? config.ars.kappa0 : rep.rounds.back().kappa;
    pt.ars = rep.ars;
    pt.adversarial_ratio = rep.adversarial_ratio;
    result.trajectory.push_back(pt);
  };
  record_ars(result.baseline, 0);

  // one CW-derived adversarial counterpart per attack flow; the refresh
  // iterations keep them current from cycle to cycle
  Model current = result.baseline;
  std::vector<Counterpart> counterparts(attack_idx.size());
  parallel_for(attack_idx.size(), config.threads, [&](std::size_t i) {
    Counterpart cp;
    cp.source = attack_idx[i];
    const Flow& src = train_data.flows[attack_idx[i]];
    cp.constraints = derive_constraints(current, src);
    CWConfig cw;
    cw.kappa = config.kappa;
    cw.delta = config.delta;
    cw.base_iters = config.seed_iters;
    const AdversarialResult seeded = cw_attack(current, src, cw);
    cp.flow = seeded.adv_flow;
    cp.flow.label = Label::kAttack;
    cp.tensor = flow_to_input(cp.flow, current.schema, current.stats, false, {});
    counterparts[i] = std::move(cp);
  });
  result.augmented_size = train_data.flows.size() + counterparts.size();

  TrainConfig cycle_cfg = config.train;
  cycle_cfg.epochs = config.epochs_per_cycle;

  for (std::uint32_t cycle = 1; cycle <= config.cycles; ++cycle) {
    // refresh every counterpart against the cycle-boundary model snapshot
    parallel_for(counterparts.size(), config.threads, [&](std::size_t i) {
      refresh_counterpart(current, train_data.flows[counterparts[i].source], counterparts[i],
                          config);
    });
    result.adversarial_passes += config.refresh_iters;

    Dataset augmented = train_data;
    for (const auto& cp : counterparts) augmented.flows.push_back(cp.flow);

    // continue training the live model on the augmented set
    cycle_cfg.seed = config.train.seed + cycle;
    TrainResult tr = resume_training(current, augmented, stats, cycle_cfg);
    current = std::move(tr.model);
    result.train_passes += config.epochs_per_cycle;

    record_ars(current, cycle);
  }

  result.hardened = std::move(current);
  result.hardened.params.hardened = true;
  result.hardened_metrics = evaluate(result.hardened, test_data);
  for (const auto& cp : counterparts) {
    result.counterparts.push_back(cp.flow);
    result.counterpart_sources.push_back(cp.source);
  }
  return result;
}

}  // namespace flowids
