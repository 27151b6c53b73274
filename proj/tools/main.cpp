#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "flowids/dataset.hpp"
#include "flowids/defenses.hpp"
#include "flowids/explain.hpp"
#include "flowids/gradcheck.hpp"
#include "flowids/ingest.hpp"
#include "flowids/model_io.hpp"
#include "flowids/report.hpp"
#include "flowids/robustness.hpp"
#include "flowids/runconfig.hpp"
#include "flowids/synth.hpp"
#include "flowids/util.hpp"

#include "json.hpp"

namespace fs = std::filesystem;
using namespace flowids;

namespace {

struct Ctx {
  RunConfig cfg;
  Manifest manifest;

  fs::path out(const std::string& name) {
    fs::create_directories(cfg.paths.out_dir);
    manifest.outputs.push_back(name);
    return fs::path(cfg.paths.out_dir) / name;
  }

  void input(const std::string& path) { manifest.inputs.push_back(path); }

  void finish(const std::string& subcommand) {
    manifest.subcommand = subcommand;
    manifest.config_hash = cfg.config_hash();
    manifest.seed = cfg.seed;
    manifest.version = kVersion;
    write_manifest(cfg.paths.out_dir, manifest);
  }
};

DatasetCache load_dataset_checked(Ctx& ctx) {
  if (ctx.cfg.paths.dataset.empty()) throw ConfigError("paths.dataset is required");
  ctx.input(ctx.cfg.paths.dataset);
  return load_dataset(ctx.cfg.paths.dataset);
}

Model load_model_checked(Ctx& ctx) {
  if (ctx.cfg.paths.model.empty()) throw ConfigError("paths.model is required");
  ctx.input(ctx.cfg.paths.model);
  return load_model(ctx.cfg.paths.model);
}

// Train/test view of a dataset cache: pre-split caches pass through, an
// unsplit cache is split deterministically under the run seed.
struct SplitView {
  Dataset train;
  Dataset test;
  NormalizationStats stats;
};

SplitView make_split(const DatasetCache& cache, std::uint64_t seed) {
  SplitView v;
  if (cache.dataset.split_tag == SplitTag::kUnsplit) {
    auto [tr, te] = split_dataset(cache.dataset, seed);
    v.train = std::move(tr);
    v.test = std::move(te);
  } else if (cache.dataset.split_tag == SplitTag::kTrain) {
    v.train = cache.dataset;
    throw ConfigError("dataset is a train split; provide the unsplit cache");
  } else {
    throw ConfigError("dataset is a test split; provide the unsplit cache");
  }
  v.stats = cache.stats ? *cache.stats : fit_normalizer(v.train);
  return v;
}

const Dataset& pick_split(const SplitView& v, const std::string& which) {
  if (which == "train") return v.train;
  return v.test;
}

int cmd_ingest(Ctx& ctx, const std::string& input_csv) {
  if (input_csv.empty()) throw ConfigError("ingest: --input is required");
  if (ctx.cfg.paths.dataset.empty()) throw ConfigError("paths.dataset is required");
  ctx.input(input_csv);
  const auto records = parse_packet_csv_file(input_csv);
  DatasetCache cache;
  cache.dataset.flows = assemble_flows(records);
  cache.dataset.schema = FeatureSchema::canonical();
  save_dataset(ctx.cfg.paths.dataset, cache);
  std::cout << "ingested " << records.size() << " packets into " << cache.dataset.flow_count()
            << " flows -> " << ctx.cfg.paths.dataset << "\n";
  ctx.manifest.outputs.push_back(ctx.cfg.paths.dataset);
  ctx.finish("ingest");
  return 0;
}

int cmd_synth(Ctx& ctx) {
  if (ctx.cfg.paths.dataset.empty()) throw ConfigError("paths.dataset is required");
  DatasetCache cache;
  cache.dataset = synth_generate(ctx.cfg.synth, ctx.cfg.seed);
  save_dataset(ctx.cfg.paths.dataset, cache);
  std::cout << "generated " << cache.dataset.flow_count() << " flows ("
            << cache.dataset.count_label(Label::kAttack) << " attack) -> "
            << ctx.cfg.paths.dataset << "\n";
  ctx.manifest.outputs.push_back(ctx.cfg.paths.dataset);
  ctx.finish("synth");
  return 0;
}

int cmd_train(Ctx& ctx) {
  if (ctx.cfg.paths.model.empty()) throw ConfigError("paths.model is required");
  const auto cache = load_dataset_checked(ctx);
  const auto view = make_split(cache, ctx.cfg.seed);

  const TrainResult result = ctx.cfg.train.feature_dropout
                                 ? train_feature_dropout(view.train, view.stats, ctx.cfg.train)
                                 : train(view.train, view.stats, ctx.cfg.train);
  save_model(ctx.cfg.paths.model, result.model);
  ctx.manifest.outputs.push_back(ctx.cfg.paths.model);
  write_file_text(ctx.out("train_history.csv").string(), history_to_csv(result.history));

  const MetricsReport metrics = evaluate(result.model, view.test);
  write_file_text(ctx.out("train_eval.json").string(), metrics_to_json(metrics));
  std::cout << "trained " << (ctx.cfg.train.feature_dropout ? "feature-dropout " : "")
            << "model (" << ctx.cfg.train.layers << "x" << ctx.cfg.train.hidden << ", "
            << ctx.cfg.train.epochs << " epochs) -> " << ctx.cfg.paths.model
            << "\nheld-out flow accuracy: " << metrics.flow.accuracy << "\n";
  ctx.finish("train");
  return 0;
}

int cmd_eval(Ctx& ctx, const std::string& split) {
  const Model model = load_model_checked(ctx);
  const auto cache = load_dataset_checked(ctx);
  MetricsReport metrics;
  if (split == "all" && cache.dataset.split_tag != SplitTag::kUnsplit) {
    metrics = evaluate(model, cache.dataset);
  } else {
    const auto view = make_split(cache, ctx.cfg.seed);
    metrics = evaluate(model, split == "all" ? cache.dataset : pick_split(view, split));
  }
  write_file_text(ctx.out("metrics.json").string(), metrics_to_json(metrics));
  write_file_text(ctx.out("metrics.csv").string(), metrics_to_csv(metrics));
  std::cout << metrics_to_csv(metrics);
  ctx.finish("eval");
  return 0;
}

int cmd_attack(Ctx& ctx, const std::string& save_adv) {
  const Model model = load_model_checked(ctx);
  const auto cache = load_dataset_checked(ctx);
  const auto view = make_split(cache, ctx.cfg.seed);
  const AttackEvaluation ev = evaluate_attack(model, view.test, ctx.cfg.attack);

  const std::string method = attack_method_name(ctx.cfg.attack.method);
  write_file_text(ctx.out("attack_" + method + "_flows.csv").string(),
                  attack_rows_to_csv(ev, ctx.cfg.attack.method));
  write_file_text(ctx.out("attack_" + method + "_summary.json").string(),
                  attack_summary_to_json(ev, ctx.cfg.attack.method));
  if (!save_adv.empty()) {
    // adversarial flows as a dataset cache, e.g. for seqpdp overlays
    DatasetCache adv;
    adv.dataset.schema = model.schema;
    for (const auto& res : ev.results) adv.dataset.flows.push_back(res.adv_flow);
    save_dataset(save_adv, adv);
    ctx.manifest.outputs.push_back(save_adv);
  }
  std::cout << "method " << method << ": success ratio " << ev.overall.success_ratio << " over "
            << ev.overall.n << " attack flows\n";
  ctx.finish("attack");
  return 0;
}

int cmd_ars(Ctx& ctx, const std::string& type_filter, std::size_t max_samples) {
  const Model model = load_model_checked(ctx);
  const auto cache = load_dataset_checked(ctx);
  const auto view = make_split(cache, ctx.cfg.seed);

  std::vector<Flow> samples;
  for (const auto& fl : view.test.flows)
    if (fl.is_attack() && (type_filter.empty() || fl.attack_type == type_filter))
      samples.push_back(fl);
  if (max_samples > 0 && samples.size() > max_samples) samples.resize(max_samples);

  const RobustnessReport rep = compute_ars(model, samples, ctx.cfg.ars);
  write_file_text(ctx.out("ars.json").string(), ars_report_to_json(rep));
  write_file_text(ctx.out("ars_trace.csv").string(), ars_trace_to_csv(rep));
  std::cout << "ARS = " << (std::isinf(rep.ars) ? std::string("inf") : fmt_double(rep.ars))
            << " over " << rep.samples << " samples (adversarial ratio "
            << rep.adversarial_ratio << ")\n";
  ctx.finish("ars");
  return 0;
}

int cmd_explain(Ctx& ctx, const std::string& feature2, const std::string& adv_dataset) {
  const Model model = load_model_checked(ctx);
  const auto cache = load_dataset_checked(ctx);
  const auto view = make_split(cache, ctx.cfg.seed);
  const Dataset& data = view.test;

  const auto& ex = ctx.cfg.explain;
  const ClassFilter filter = ClassFilter::parse(ex.class_filter);
  const int feature = model.schema.index_of(ex.feature);
  const auto& method = ex.method;

  if (method == "weights") {
    const auto table = importance_weights(model);
    write_file_text(ctx.out("importance_weights.csv").string(), importance_to_csv(table));
    write_file_text(ctx.out("importance_weights.json").string(), importance_to_json(table));
  } else if (method == "perturb") {
    const auto table = importance_perturbation(model, data, ex.seed);
    write_file_text(ctx.out("importance_perturbation.csv").string(), importance_to_csv(table));
    write_file_text(ctx.out("importance_perturbation.json").string(), importance_to_json(table));
  } else if (method == "dropout") {
    const auto table = importance_dropout(model, data);
    write_file_text(ctx.out("importance_dropout.csv").string(), importance_to_csv(table));
    write_file_text(ctx.out("importance_dropout.json").string(), importance_to_json(table));
  } else if (method == "shared") {
    if (feature < 0) throw ConfigError("explain.feature: unknown feature '" + ex.feature + "'");
    const int f2 = model.schema.index_of(feature2);
    if (f2 < 0) throw ConfigError("explain: --feature2 must name a feature");
    const auto score = shared_info_score(model, data, feature, f2);
    write_file_text(ctx.out("shared_info.json").string(), shared_info_to_json(score));
  } else if (method == "mi") {
    MICfg mi;
    mi.feature_bins = ex.mi_bins;
    const auto table = sensitivity_mutual_information(model, data, mi);
    write_file_text(ctx.out("sensitivity_mi.csv").string(), importance_to_csv(table));
    write_file_text(ctx.out("sensitivity_mi.json").string(), importance_to_json(table));
  } else if (method == "pdp") {
    if (feature < 0) throw ConfigError("explain.feature: unknown feature '" + ex.feature + "'");
    const auto grid = quantile_grid(data, filter, feature, ex.grid_points);
    const auto curve = conditional_pdp(model, data, filter, feature, grid);
    write_file_text(ctx.out("pdp_" + ex.feature + ".csv").string(), pdp_to_csv(curve));
    write_file_text(ctx.out("pdp_" + ex.feature + ".json").string(), pdp_to_json(curve));
  } else if (method == "seqpdp") {
    if (feature < 0) throw ConfigError("explain.feature: unknown feature '" + ex.feature + "'");
    const auto grid = quantile_grid(data, filter, feature, ex.grid_points);
    const auto curve = sequential_pdp(model, data, filter, feature, ex.step, grid);
    const std::string tag = ex.feature + "_t" + std::to_string(ex.step);
    write_file_text(ctx.out("seqpdp_" + tag + ".csv").string(), pdp_to_csv(curve));
    write_file_text(ctx.out("seqpdp_" + tag + ".json").string(), pdp_to_json(curve));
    // mean feature trajectories to overlay on the curve
    const auto prof = feature_sequence_profile(data, filter, feature);
    write_file_text(ctx.out("seqpdp_" + tag + "_trajectory.csv").string(),
                    profile_to_csv(prof, ex.feature));
    if (!adv_dataset.empty()) {
      ctx.input(adv_dataset);
      const DatasetCache adv = load_dataset(adv_dataset);
      const auto adv_prof = feature_sequence_profile(adv.dataset, filter, feature);
      write_file_text(ctx.out("seqpdp_" + tag + "_trajectory_adv.csv").string(),
                      profile_to_csv(adv_prof, ex.feature));
    }
  } else if (method == "confidence") {
    const auto steps = confidence_per_step(model, data, filter);
    write_file_text(ctx.out("confidence_per_step.csv").string(), confidence_to_csv(steps));
    write_file_text(ctx.out("confidence_per_step.json").string(), confidence_to_json(steps));
  } else if (method == "profile") {
    if (feature < 0) throw ConfigError("explain.feature: unknown feature '" + ex.feature + "'");
    const auto prof = feature_sequence_profile(data, filter, feature);
    write_file_text(ctx.out("profile_" + ex.feature + ".csv").string(),
                    profile_to_csv(prof, ex.feature));
    write_file_text(ctx.out("profile_" + ex.feature + ".json").string(),
                    profile_to_json(prof, ex.feature));
  } else {
    throw ConfigError("explain.method: unknown method '" + method + "'");
  }
  ctx.finish("explain");
  return 0;
}

int cmd_defend(Ctx& ctx) {
  const auto cache = load_dataset_checked(ctx);
  const auto view = make_split(cache, ctx.cfg.seed);
  const auto& mode = ctx.cfg.defense.mode;

  if (mode == "reduce-both" || mode == "reduce-forward") {
    const ReductionMode rm = mode == "reduce-both" ? ReductionMode::kBothDirections
                                                   : ReductionMode::kAttackerDirectionOnly;
    Dataset reduced_train = view.train;
    reduced_train.schema = reduce_features(view.train.schema, rm);
    Dataset reduced_test = view.test;
    reduced_test.schema = reduced_train.schema;

    const TrainResult result = train(reduced_train, view.stats, ctx.cfg.train);
    if (ctx.cfg.paths.model.empty()) throw ConfigError("paths.model is required");
    save_model(ctx.cfg.paths.model, result.model);
    ctx.manifest.outputs.push_back(ctx.cfg.paths.model);

    const MetricsReport metrics = evaluate(result.model, reduced_test);
    write_file_text(ctx.out("defense_metrics.json").string(), metrics_to_json(metrics));
    std::cout << "reduced-schema model (" << reduction_name(result.model.schema.reduction)
              << ") flow accuracy: " << metrics.flow.accuracy << "\n";
  } else { // advtrain
    AdvTrainConfig at = ctx.cfg.defense.advtrain;
    const AdvTrainResult result = adversarial_training(view.train, view.test, view.stats, at);
    if (ctx.cfg.paths.model.empty()) throw ConfigError("paths.model is required");
    save_model(ctx.cfg.paths.model, result.hardened);
    ctx.manifest.outputs.push_back(ctx.cfg.paths.model);

    write_file_text(ctx.out("advtrain_trajectory.csv").string(),
                    advtrain_trajectory_to_csv(result));
    write_file_text(ctx.out("advtrain_metrics.json").string(),
                    metrics_to_json(result.hardened_metrics));
    std::cout << "adversarial training: baseline ARS "
              << fmt_double(result.trajectory.front().ars) << " -> final ARS "
              << fmt_double(result.trajectory.back().ars) << "\n";
  }
  ctx.finish("defend");
  return 0;
}

int cmd_gradcheck(Ctx& ctx) {
  const GradCheckReport rep = grad_check(ctx.cfg.seed);
  std::cout << rep.summary() << "\n";
  write_file_text(ctx.out("gradcheck.txt").string(), rep.summary() + "\n");
  ctx.finish("gradcheck");
  return rep.pass() ? 0 : 3;
}

// Plot-ready export: a .dat table plus a gnuplot script for a curve
// artifact produced by explain/ars.
int cmd_export_plot(Ctx& ctx, const std::string& artifact) {
  if (artifact.empty()) throw ConfigError("export-plot: --artifact is required");
  ctx.input(artifact);
  const auto bytes = read_file_bytes(artifact);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(std::string(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("export-plot: not a JSON artifact: " + std::string(e.what()));
  }

  const std::string stem = fs::path(artifact).stem().string();
  std::ostringstream dat;
  std::string xlabel = "x", ylabel = "y";
  if (j.contains("points")) { // PDP curve
    xlabel = j.value("feature_name", "value");
    ylabel = "mean prediction";
    dat << "# " << xlabel << " mean min max\n";
    for (const auto& p : j["points"])
      dat << p["value"].dump() << ' ' << p["mean"].dump() << ' ' << p["min"].dump() << ' '
          << p["max"].dump() << '\n';
  } else if (j.contains("rounds")) { // ARS report
    xlabel = "round";
    ylabel = "candidate ARS";
    dat << "# round kappa adversarial candidate_ars\n";
    for (const auto& r : j["rounds"]) {
      const auto ars = r["candidate_ars"];
      dat << r["round"].dump() << ' ' << r["kappa"].dump() << ' ' << r["adversarial"].dump()
          << ' ' << (ars.is_string() ? "inf" : ars.dump()) << '\n';
    }
  } else {
    throw DataError("export-plot: unrecognized artifact shape (expected points or rounds)");
  }

  const auto dat_path = ctx.out(stem + ".dat");
  write_file_text(dat_path.string(), dat.str());
  std::ostringstream gp;
  gp << "set terminal pngcairo size 900,600\n"
     << "set output '" << stem << ".png'\n"
     << "set xlabel '" << xlabel << "'\n"
     << "set ylabel '" << ylabel << "'\n"
     << "plot '" << stem << ".dat' using 1:2 with lines title '" << stem << "'\n";
  write_file_text(ctx.out(stem + ".gp").string(), gp.str());
  std::cout << "wrote " << dat_path.string() << " and gnuplot script\n";
  ctx.finish("export-plot");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowids: recurrent flow classifier workbench (train / attack / score / explain / harden)"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file");

  // flag overrides; flags win over the config file
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> dataset_path, model_path, out_dir;
  app.add_option("--seed", seed, "Override seed");
  app.add_option("--threads", threads, "Cap internal parallelism");
  app.add_option("--dataset", dataset_path, "Dataset cache path");
  app.add_option("--model", model_path, "Model file path");
  app.add_option("--out", out_dir, "Output directory");

  auto* ingest = app.add_subcommand("ingest", "Parse a packet CSV into a dataset cache");
  std::string input_csv;
  ingest->add_option("--input", input_csv, "Packet CSV file");

  auto* synth = app.add_subcommand("synth", "Generate the synthetic desk-scale dataset");
  std::optional<std::size_t> synth_benign, synth_dos, synth_scan, synth_slow, synth_bot;
  synth->add_option("--benign", synth_benign);
  synth->add_option("--dos", synth_dos);
  synth->add_option("--scan", synth_scan);
  synth->add_option("--slow", synth_slow);
  synth->add_option("--bot", synth_bot);

  std::optional<std::uint32_t> epochs;
  std::optional<int> hidden, layers;
  app.add_option("--epochs", epochs, "Training epochs (train/defend)");
  app.add_option("--hidden", hidden, "Hidden width (train/defend)");
  app.add_option("--layers", layers, "LSTM layers (train/defend)");

  auto* train_cmd = app.add_subcommand("train", "Train the classifier on the train split");
  bool feature_dropout = false;
  train_cmd->add_flag("--feature-dropout", feature_dropout, "Train with missing-feature inputs");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model (per-packet and per-flow)");
  std::string eval_split = "test";
  eval_cmd->add_option("--split", eval_split, "train|test|all")
      ->check(CLI::IsMember({"train", "test", "all"}));

  auto* attack = app.add_subcommand("attack", "Generate adversarial flows on the test split");
  std::optional<std::string> method;
  std::optional<double> kappa, epsilon;
  attack->add_option("--method", method, "cw|pgd|fgsm")
      ->check(CLI::IsMember({"cw", "pgd", "fgsm"}));
  attack->add_option("--kappa", kappa, "CW tradeoff");
  attack->add_option("--epsilon", epsilon, "PGD/FGSM L-inf budget");
  std::string save_adv;
  attack->add_option("--save-adv", save_adv, "Also write adversarial flows as a dataset cache");

  auto* ars = app.add_subcommand("ars", "Adversarial Robustness Score via kappa escalation");
  std::string ars_type;
  std::size_t ars_max_samples = 0;
  ars->add_option("--attack-type", ars_type, "Restrict to one attack type");
  ars->add_option("--samples", ars_max_samples, "Cap the sample count (0 = all)");

  auto* explain = app.add_subcommand("explain", "Importance / sensitivity / PDP analyses");
  std::optional<std::string> ex_method, ex_feature, ex_class;
  std::optional<std::size_t> ex_step;
  std::string ex_feature2;
  explain->add_option("--method", ex_method,
                      "weights|perturb|dropout|shared|mi|pdp|seqpdp|confidence|profile");
  explain->add_option("--feature", ex_feature, "Feature name");
  explain->add_option("--feature2", ex_feature2, "Second feature (shared)");
  explain->add_option("--class", ex_class, "all|benign|attack|<type>");
  explain->add_option("--step", ex_step, "Step index (seqpdp)");
  std::string ex_adv;
  explain->add_option("--adv", ex_adv, "Adversarial dataset cache for trajectory overlays (seqpdp)");

  auto* defend = app.add_subcommand("defend", "Feature reduction or adversarial training");
  std::optional<std::string> def_mode;
  std::optional<std::uint32_t> def_cycles;
  defend->add_option("--mode", def_mode, "reduce-both|reduce-forward|advtrain")
      ->check(CLI::IsMember({"reduce-both", "reduce-forward", "advtrain"}));
  defend->add_option("--cycles", def_cycles, "Adversarial training cycles");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the BPTT core");

  auto* export_plot = app.add_subcommand("export-plot", "Convert a JSON artifact to gnuplot files");
  std::string artifact;
  export_plot->add_option("--artifact", artifact, "Artifact JSON produced by explain/ars");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    Ctx ctx;
    ctx.cfg = config_path.empty() ? RunConfig::defaults() : RunConfig::from_file(config_path);

    if (seed) {
      ctx.cfg.seed = *seed;
      ctx.cfg.train.seed = *seed;
    }
    if (threads) {
      ctx.cfg.threads = *threads;
      ctx.cfg.attack.threads = *threads;
      ctx.cfg.ars.threads = *threads;
      ctx.cfg.defense.advtrain.threads = *threads;
    }
    if (dataset_path) ctx.cfg.paths.dataset = *dataset_path;
    if (model_path) ctx.cfg.paths.model = *model_path;
    if (out_dir) ctx.cfg.paths.out_dir = *out_dir;

    if (synth_benign) ctx.cfg.synth.benign = *synth_benign;
    if (synth_dos) ctx.cfg.synth.dos = *synth_dos;
    if (synth_scan) ctx.cfg.synth.scan = *synth_scan;
    if (synth_slow) ctx.cfg.synth.slow = *synth_slow;
    if (synth_bot) ctx.cfg.synth.bot = *synth_bot;
    if (feature_dropout) ctx.cfg.train.feature_dropout = true;
    if (epochs) ctx.cfg.train.epochs = *epochs;
    if (hidden) ctx.cfg.train.hidden = *hidden;
    if (layers) ctx.cfg.train.layers = *layers;
    if (method) {
      if (*method == "cw") ctx.cfg.attack.method = AttackMethod::kCW;
      else if (*method == "pgd") ctx.cfg.attack.method = AttackMethod::kPGD;
      else ctx.cfg.attack.method = AttackMethod::kFGSM;
    }
    if (kappa) ctx.cfg.attack.cw.kappa = *kappa;
    if (epsilon) {
      ctx.cfg.attack.pgd.epsilon = *epsilon;
      ctx.cfg.attack.fgsm_epsilon = *epsilon;
    }
    if (ex_method) ctx.cfg.explain.method = *ex_method;
    if (ex_feature) ctx.cfg.explain.feature = *ex_feature;
    if (ex_class) ctx.cfg.explain.class_filter = *ex_class;
    if (ex_step) ctx.cfg.explain.step = *ex_step;
    if (def_mode) ctx.cfg.defense.mode = *def_mode;
    if (def_cycles) ctx.cfg.defense.advtrain.cycles = *def_cycles;

    // keep derived sections in sync with overrides
    ctx.cfg.defense.advtrain.train = ctx.cfg.train;
    ctx.cfg.defense.advtrain.ars = ctx.cfg.ars;

    if (ingest->parsed()) return cmd_ingest(ctx, input_csv);
    if (synth->parsed()) return cmd_synth(ctx);
    if (train_cmd->parsed()) return cmd_train(ctx);
    if (eval_cmd->parsed()) return cmd_eval(ctx, eval_split);
    if (attack->parsed()) return cmd_attack(ctx, save_adv);
    if (ars->parsed()) return cmd_ars(ctx, ars_type, ars_max_samples);
    if (explain->parsed()) return cmd_explain(ctx, ex_feature2, ex_adv);
    if (defend->parsed()) return cmd_defend(ctx);
    if (gradcheck->parsed()) return cmd_gradcheck(ctx);
    if (export_plot->parsed()) return cmd_export_plot(ctx, artifact);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
