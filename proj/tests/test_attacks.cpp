#include "doctest.h"

#include <cmath>

#include "flowids/attacks.hpp"
#include "flowids/classifier.hpp"
#include "flowids/util.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace flowids;
using namespace flowids::testutil;

namespace {

Model always_benign_model() {
  Model m = zero_model(1, 2);
  m.params.flat[m.params.layout.head_b] = -1.0;
  return m;
}

// Single-step model with hand-chosen cell-gate weights, so the loss
// gradient signs on (packet_length, iat) are (+, -).
Model crafted_sign_model() {
  Model m = zero_model(1, 1);
  auto& p = m.params;
  const auto& lo = p.layout.layer[0];
  const std::size_t H = 1;
  // cell-gate row is the third gate block
  p.flat[lo.w_in + 2 * H * lo.in_width + kPacketLength] = -1.0;
  p.flat[lo.w_in + 2 * H * lo.in_width + kIat] = 1.0;
  p.flat[p.layout.head_w] = 1.0;
  return m;
}

// 1-packet flows, two editable features; the trained threshold sits a
// known distance above the attack cluster.
Model toy_boundary_model(Dataset* out_attacks = nullptr) {
  Dataset ds;
  ds.schema = FeatureSchema::canonical();
  Rng rng(91);
  for (int i = 0; i < 60; ++i) {
    Flow b = make_flow({{rng.uniform(2.0, 3.0), rng.uniform(1.5, 2.5), kDirForward}},
                       Label::kBenign);
    Flow a = make_flow({{rng.uniform(0.0, 0.4), rng.uniform(0.0, 0.3), kDirForward}},
                       Label::kAttack);
    ds.flows.push_back(b);
    ds.flows.push_back(a);
  }
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.layers = 1;
  cfg.hidden = 6;
  cfg.batch_size = 8;
  cfg.seed = 17;
  cfg.input_noise_std = 0.2;
  Model m = train(ds, fit_normalizer(ds), cfg).model;
  if (out_attacks) {
    out_attacks->schema = ds.schema;
    for (const auto& fl : ds.flows)
      if (fl.is_attack()) out_attacks->flows.push_back(fl);
  }
  return m;
}

}  // namespace

TEST_CASE("project_constraints: packets never shrink, reverse stays frozen") {
  const Model m = zero_model();
  // two packets: forward then reverse; flow not fully controlled
  const Flow fl = make_flow({{100, 0, kDirForward}, {50, 0.5, kDirReverse}});
  const AttackConstraints c = derive_constraints(m, fl);

  Matrix cand = c.original;
  cand.at(0, kPacketLength) = 90.0;  // below original 100 -> reset
  cand.at(0, kIat) = 0.9;            // above original -> kept
  cand.at(1, kPacketLength) = 500.0; // reverse-direction edit -> reverted
  cand.at(1, kIat) = 2.0;
  const Matrix proj = project_constraints(c, cand);
  CHECK(proj.at(0, kPacketLength) == 100.0);
  CHECK(proj.at(0, kIat) == 0.9);
  CHECK(proj.at(1, kPacketLength) == 50.0);
  CHECK(proj.at(1, kIat) == 0.5);
  // non-manipulable entries always revert
  Matrix cand2 = c.original;
  cand2.at(0, kDstPort) = 1.0;
  CHECK(project_constraints(c, cand2).at(0, kDstPort) == c.original.at(0, kDstPort));
}

TEST_CASE("derive_constraints: fully controlled flows expose both directions") {
  const Model m = zero_model();
  const Flow fl = make_flow({{100, 0, kDirForward}, {50, 0.5, kDirReverse}}, Label::kAttack,
                            "bot", /*fully_controlled=*/true);
  const AttackConstraints c = derive_constraints(m, fl);
  CHECK(c.is_editable(1, kPacketLength));
  CHECK(c.is_editable(1, kIat));
  CHECK(c.editable_count() == 4);
  CHECK_FALSE(c.is_editable(0, kDstPort));
}

TEST_CASE("cw_attack: already-benign model succeeds at distance zero") {
  const Model m = always_benign_model();
  const AdversarialResult res = cw_attack(m, make_flow({{100, 0, 0}, {120, 0.1, 0}}), {});
  CHECK(res.success);
  CHECK(res.l1 == 0.0);
  CHECK(res.adv_flow == make_flow({{100, 0, 0}, {120, 0.1, 0}}));
}

TEST_CASE("cw_attack: benign-labeled input rejected") {
  const Model m = always_benign_model();
  CHECK_THROWS_AS(cw_attack(m, make_flow({{1, 0, 0}}, Label::kBenign), {}), DataError);
  CWConfig bad;
  bad.kappa = 0.0;
  CHECK_THROWS_AS(cw_attack(m, make_flow({{1, 0, 0}}), bad), ConfigError);
}

TEST_CASE("cw_attack: successful samples sit past the 55% benign margin") {
  Dataset attacks;
  const Model m = toy_boundary_model(&attacks);
  CWConfig cw;
  cw.base_iters = 400;
  std::size_t successes = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    const AdversarialResult res = cw_attack(m, attacks.flows[i], cw);
    if (!res.success) continue;
    ++successes;
    const Prediction p = predict_flow(m, res.adv_flow);
    CHECK(1.0 - p.confidence.back() >= 0.5498);
    CHECK(res.l1 < std::numeric_limits<double>::infinity());
    CHECK(res.l1 > 0.0);
  }
  CHECK(successes > 0);
}

TEST_CASE("cw_attack: near grid-search optimal on the 2-feature toy") {
  Dataset attacks;
  const Model m = toy_boundary_model(&attacks);
  CWConfig cw;
  cw.kappa = 2.0;
  cw.base_iters = 1200;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto grid = oracle::grid_min_distance(m, attacks.flows[i], cw.delta, 4.0, 1e-3);
    if (!grid.found) continue;
    const AdversarialResult res = cw_attack(m, attacks.flows[i], cw);
    REQUIRE(res.success);
    CHECK(res.l1 <= grid.min_l1 * 1.05 + 1e-6);
    ++compared;
  }
  CHECK(compared >= 3);
}

TEST_CASE("pgd_linf_attack: epsilon 0 returns the original flow") {
  Dataset attacks;
  const Model m = toy_boundary_model(&attacks);
  PGDConfig cfg;
  cfg.epsilon = 0.0;
  const AdversarialResult res = pgd_linf_attack(m, attacks.flows[0], cfg);
  CHECK(res.adv_flow == attacks.flows[0]);
  CHECK_FALSE(res.success); // this toy model detects the unmodified flow
  CHECK_THROWS_AS(pgd_linf_attack(m, attacks.flows[0], {.epsilon = -1.0}), DataError);
}

TEST_CASE("pgd_linf_attack: iterates stay inside the epsilon ball and feasible") {
  Dataset attacks;
  const Model m = toy_boundary_model(&attacks);
  PGDConfig cfg;
  cfg.epsilon = 0.8;
  cfg.iters = 40;
  for (std::size_t i = 0; i < 8; ++i) {
    const AdversarialResult res = pgd_linf_attack(m, attacks.flows[i], cfg);
    const AttackConstraints c = derive_constraints(m, attacks.flows[i]);
    const Matrix adv = flow_to_input(res.adv_flow, m.schema, m.stats, false, {});
    CHECK(linf_distance(c, adv) <= cfg.epsilon + 1e-12);
    CHECK(project_constraints(c, adv) == adv); // feasibility is exact
  }
}

TEST_CASE("fgsm_attack: epsilon 0 is the identity") {
  Dataset attacks;
  const Model m = toy_boundary_model(&attacks);
  const AdversarialResult res = fgsm_attack(m, attacks.flows[0], 0.0);
  CHECK(res.adv_flow == attacks.flows[0]);
  CHECK_THROWS_AS(fgsm_attack(m, attacks.flows[0], -0.1), DataError);
}

TEST_CASE("fgsm_attack: signed step then monotone projection") {
  const Model m = crafted_sign_model();
  const Flow fl = make_flow({{0.0, 0.0, kDirForward}});

  // verify the crafted gradient signs first
  const AttackConstraints c = derive_constraints(m, fl);
  const ForwardTrace tr = forward(m.params, c.original);
  const Matrix g = backward_inputs(m.params, tr, GradObjective::loss({1.0}));
  REQUIRE(g.at(0, kPacketLength) > 0.0);
  REQUIRE(g.at(0, kIat) < 0.0);

  const AdversarialResult res = fgsm_attack(m, fl, 0.1);
  // +0.1 kept on the positive-gradient entry, -0.1 clipped back to 0
  CHECK(res.adv_flow.packets[0][kPacketLength] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(res.adv_flow.packets[0][kIat] == 0.0);
}

TEST_CASE("attacks: re-projection idempotence over many adversarial flows") {
  Dataset attacks;
  const Model m = toy_boundary_model(&attacks);
  CWConfig cw;
  cw.base_iters = 300;
  for (std::size_t i = 0; i < 10; ++i) {
    const AdversarialResult res = cw_attack(m, attacks.flows[i], cw);
    const AttackConstraints c = derive_constraints(m, attacks.flows[i]);
    const Matrix adv = flow_to_input(res.adv_flow, m.schema, m.stats, false, {});
    CHECK(project_constraints(c, adv) == adv);
    // monotone non-decrease in raw space as well
    for (std::size_t t = 0; t < res.adv_flow.packets.size(); ++t)
      for (int j : {static_cast<int>(kPacketLength), static_cast<int>(kIat)})
        CHECK(res.adv_flow.packets[t][j] >= attacks.flows[i].packets[t][j]);
  }
}

TEST_CASE("evaluate_attack: trivially evadable model gives ratio 1 at distance 0") {
  const Model m = always_benign_model();
  Dataset ds;
  ds.schema = FeatureSchema::canonical();
  for (int i = 0; i < 5; ++i) ds.flows.push_back(make_flow({{100, 0, 0}}));
  AttackSettings settings;
  settings.cw.base_iters = 10;
  const AttackEvaluation ev = evaluate_attack(m, ds, settings);
  CHECK(ev.overall.success_ratio == 1.0);
  CHECK(ev.overall.mean_l1 == 0.0);
  CHECK(ev.overall.detection_accuracy_unmodified == 0.0);
}

TEST_CASE("evaluate_attack: no attack flows is an error") {
  const Model m = always_benign_model();
  Dataset ds;
  ds.schema = FeatureSchema::canonical();
  ds.flows.push_back(make_flow({{1, 0, 0}}, Label::kBenign));
  CHECK_THROWS_AS(evaluate_attack(m, ds, {}), DataError);
}

TEST_CASE("evaluate_attack: deterministic across thread counts") {
  Dataset attacks;
  const Model m = toy_boundary_model(&attacks);
  Dataset ds;
  ds.schema = attacks.schema;
  for (std::size_t i = 0; i < 8; ++i) ds.flows.push_back(attacks.flows[i]);
  AttackSettings one;
  one.cw.base_iters = 150;
  one.threads = 1;
  AttackSettings two = one;
  two.threads = 2;
  const AttackEvaluation a = evaluate_attack(m, ds, one);
  const AttackEvaluation b = evaluate_attack(m, ds, two);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].success == b.rows[i].success);
    CHECK(a.rows[i].l1 == b.rows[i].l1);
  }
}

TEST_CASE("cw scaling: doubling a large kappa halves the rate and doubles iterations") {
  CWConfig cw;
  cw.kappa = 2.0;
  CHECK(cw.scaled_lr() == doctest::Approx(0.005));
  CHECK(cw.scaled_iters() == 2000);
  cw.kappa = 4.0;
  CHECK(cw.scaled_lr() == doctest::Approx(0.0025));
  CHECK(cw.scaled_iters() == 4000);
  // below the base tradeoff the budget floors at the base values
  cw.kappa = 0.5;
  CHECK(cw.scaled_lr() == doctest::Approx(0.01));
  CHECK(cw.scaled_iters() == 1000);
  cw.kappa = 64.0;
  CHECK(cw.scaled_iters() == cw.max_iters); // capped
}
