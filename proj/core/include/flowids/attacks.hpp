#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowids/classifier.hpp"

namespace flowids {

/// Domain constraints on adversarial perturbation, derived from the flow
/// and the schema, expressed over the model input tensor:
///  - only manipulable features (length, IAT) are editable,
///  - only on forward-direction packets unless the flow is fully
///    controlled,
///  - entries zeroed by the attacker-direction reduction are frozen,
///  - editable entries may only grow (packets must not shrink, IATs must
///    not decrease).
struct AttackConstraints {
  Matrix original;               // the feasible anchor, T x D normalized
  std::vector<std::uint8_t> editable; // T*D flags
  std::size_t steps = 0;
  std::size_t width = 0;

  bool is_editable(std::size_t t, std::size_t j) const { return editable[t * width + j] != 0; }
  std::size_t editable_count() const;
};

/// Throws ConfigError for feature-dropout models (attacks target the
/// regular input encoding).
AttackConstraints derive_constraints(const Model& model, const Flow& flow);

/// Non-editable entries reset to the original, editable entries clamped to
/// >= original.
Matrix project_constraints(const AttackConstraints& constraints, Matrix candidate);

struct CWConfig {
  double kappa = 1.0;      // attack-success/distance tradeoff, > 0
  double delta = -0.2;     // logit margin; success requires z_T < delta
  double base_lr = 0.01;   // learning rate at kappa == base_kappa
  std::size_t base_iters = 1000;
  double base_kappa = 1.0;
  /// Iteration scaling is capped so huge kappas stay tractable.
  std::size_t max_iters = 8000;
  /// Gradient-descent restarts. The first always starts at the original
  /// flow; subsequent ones start deeper inside the feasible cone (spread
  /// grows per restart) to get off saturated plateaus. The distance pull
  /// then polishes successful iterates back toward the original.
  std::size_t restarts = 4;
  double restart_spread = 1.0; // stddev units per restart step
  std::uint64_t seed = 0xc3;
  /// Margin-surface slide iterations applied to the best iterate; recovers
  /// the vertex-shaped L1 minima far faster than the oscillating descent.
  std::size_t polish_iters = 300;

  double scaled_lr() const;
  std::size_t scaled_iters() const;
};

struct PGDConfig {
  double epsilon = 0.5;    // L-inf budget in normalized space
  std::size_t iters = 100;
  double step = -1.0;      // <= 0 means epsilon/10
  double delta = -0.2;
  /// First start is the original flow, later ones random in the feasible
  /// slice of the epsilon ball.
  std::size_t restarts = 2;
  std::uint64_t seed = 0xc3;
};

struct AdversarialResult {
  bool success = false;
  double l1 = 0.0;            // over editable entries, normalized space; inf if unsuccessful
  double linf = 0.0;          // of the returned flow, 0 if unsuccessful
  double attempted_l1 = 0.0;  // distance of the final iterate, success or not
  std::size_t iterations = 0;
  Flow adv_flow;              // denormalized, constraint-satisfying
};

/// Carlini-Wagner: gradient descent on  L1(X,X~) + kappa * max(Z(X~), delta)
/// with constraint projection after every step; returns the feasible
/// iterate with the smallest distance that achieves z_T < delta.
/// Throws DataError for benign-labeled flows.
AdversarialResult cw_attack(const Model& model, const Flow& flow, const CWConfig& config);

/// L-inf-bounded PGD on the loss: ascent steps, projected onto the
/// epsilon ball intersected with the domain constraints. Same success
/// criterion as CW. Throws DataError for epsilon < 0.
AdversarialResult pgd_linf_attack(const Model& model, const Flow& flow, const PGDConfig& config);

/// Single signed-gradient step of size epsilon, then projection.
AdversarialResult fgsm_attack(const Model& model, const Flow& flow, double epsilon,
                              double delta = -0.2);

enum class AttackMethod { kCW, kPGD, kFGSM };
const char* attack_method_name(AttackMethod m);

struct AttackSettings {
  AttackMethod method = AttackMethod::kCW;
  CWConfig cw;
  PGDConfig pgd;
  double fgsm_epsilon = 0.5;
  int threads = 1;
};

struct PerFlowAttackRow {
  std::size_t flow_index = 0;
  std::string flow_id;
  std::string attack_type;
  bool detected_unmodified = false;
  bool detected_adversarial = false;
  bool success = false;
  double l1 = 0.0;
  double linf = 0.0;
  std::size_t iterations = 0;
};

struct AttackTypeSummary {
  std::string attack_type;
  std::size_t n = 0;
  double detection_accuracy_unmodified = 0.0;
  double detection_accuracy_adversarial = 0.0;
  double success_ratio = 0.0;
  double mean_l1 = 0.0, median_l1 = 0.0;   // over successful samples
  double mean_linf = 0.0, median_linf = 0.0;
};

struct AttackEvaluation {
  std::vector<PerFlowAttackRow> rows;
  std::vector<AttackTypeSummary> per_type;
  AttackTypeSummary overall;
  std::vector<AdversarialResult> results; // aligned with rows
};

/// Runs one attack method over every attack-labeled flow. Throws DataError
/// when there are none.
AttackEvaluation evaluate_attack(const Model& model, const Dataset& data,
                                 const AttackSettings& settings);

double l1_distance(const AttackConstraints& c, const Matrix& adv);
double linf_distance(const AttackConstraints& c, const Matrix& adv);

/// Rebuilds a real flow from an adversarial input tensor: edited entries
/// denormalized (clamped to >= the original raw value so feasibility is
/// exact), everything else copied from the source flow.
Flow reconstruct_flow(const Model& model, const Flow& original,
                      const AttackConstraints& constraints, const Matrix& adv_input);

}  // namespace flowids
