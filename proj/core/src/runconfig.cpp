#include "flowids/runconfig.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "flowids/util.hpp"

namespace flowids {

using nlohmann::json;

namespace {

// Section reader that rejects unknown keys and reports full key paths.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~Section() = default;

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void num(const std::string& key, T& target, double lo, double hi) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
    const double d = v->get<double>();
    if (d < lo || d > hi)
      throw ConfigError(path_ + "." + key + ": value out of range [" + std::to_string(lo) + "," +
                        std::to_string(hi) + "]");
    target = static_cast<T>(d);
  }

  void str(const std::string& key, std::string& target) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(path_ + "." + key + ": expected a string");
    target = v->get<std::string>();
  }

  void boolean(const std::string& key, bool& target) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_boolean()) throw ConfigError(path_ + "." + key + ": expected a boolean");
    target = v->get<bool>();
  }

  const json& j_;
  std::string path_;

 private:
  mutable std::set<std::string> seen_;
};

AttackMethod parse_method(const std::string& s) {
  if (s == "cw") return AttackMethod::kCW;
  if (s == "pgd") return AttackMethod::kPGD;
  if (s == "fgsm") return AttackMethod::kFGSM;
  throw ConfigError("attack.method: expected cw|pgd|fgsm, got '" + s + "'");
}

void parse_cw(Section& s, CWConfig& cw) {
  s.num("kappa", cw.kappa, 1e-9, 1e9);
  s.num("delta", cw.delta, -100.0, 100.0);
  s.num("base_lr", cw.base_lr, 1e-12, 1e3);
  s.num("base_iters", cw.base_iters, 1, 1e9);
  s.num("base_kappa", cw.base_kappa, 1e-9, 1e9);
  s.num("max_iters", cw.max_iters, 1, 1e9);
}

}  // namespace

RunConfig RunConfig::defaults() { return RunConfig{}; }

RunConfig RunConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  RunConfig cfg;
  Section top(root, "config");
  top.num("seed", cfg.seed, 0, 1.8e19);
  top.num("threads", cfg.threads, 1, 4096);

  if (const json* j = top.get("paths")) {
    Section s(*j, "paths");
    s.str("dataset", cfg.paths.dataset);
    s.str("model", cfg.paths.model);
    s.str("out_dir", cfg.paths.out_dir);
    s.finish();
  }
  if (const json* j = top.get("synth")) {
    Section s(*j, "synth");
    s.num("benign", cfg.synth.benign, 0, 1e9);
    s.num("dos", cfg.synth.dos, 0, 1e9);
    s.num("scan", cfg.synth.scan, 0, 1e9);
    s.num("slow", cfg.synth.slow, 0, 1e9);
    s.num("bot", cfg.synth.bot, 0, 1e9);
    s.num("min_len", cfg.synth.min_len, 1, 1e6);
    s.num("max_len", cfg.synth.max_len, 1, 1e6);
    s.finish();
  }
  if (const json* j = top.get("train")) {
    Section s(*j, "train");
    s.num("epochs", cfg.train.epochs, 0, 1e6);
    s.num("batch_size", cfg.train.batch_size, 1, 1e6);
    s.num("learning_rate", cfg.train.learning_rate, 1e-12, 10.0);
    s.num("layers", cfg.train.layers, 1, 64);
    s.num("hidden", cfg.train.hidden, 1, 4096);
    s.boolean("feature_dropout", cfg.train.feature_dropout);
    s.num("dropout_prob", cfg.train.dropout_prob, -1.0, 0.999999);
    s.num("label_smoothing", cfg.train.label_smoothing, 0.0, 0.49);
    s.num("input_noise_std", cfg.train.input_noise_std, 0.0, 10.0);
    s.finish();
  }
  if (const json* j = top.get("attack")) {
    Section s(*j, "attack");
    std::string method = attack_method_name(cfg.attack.method);
    s.str("method", method);
    cfg.attack.method = parse_method(method);
    parse_cw(s, cfg.attack.cw);
    s.num("pgd_epsilon", cfg.attack.pgd.epsilon, 0.0, 1e9);
    s.num("pgd_iters", cfg.attack.pgd.iters, 1, 1e9);
    s.num("pgd_step", cfg.attack.pgd.step, -1.0, 1e9);
    s.num("fgsm_epsilon", cfg.attack.fgsm_epsilon, 0.0, 1e9);
    s.finish();
    cfg.attack.pgd.delta = cfg.attack.cw.delta;
  }
  if (const json* j = top.get("ars")) {
    Section s(*j, "ars");
    s.num("kappa0", cfg.ars.kappa0, 1e-9, 1e9);
    s.num("growth", cfg.ars.growth, 1.000001, 1e3);
    s.num("max_rounds", cfg.ars.max_rounds, 1, 100000);
    parse_cw(s, cfg.ars.cw);
    s.finish();
  }
  if (const json* j = top.get("explain")) {
    Section s(*j, "explain");
    s.str("method", cfg.explain.method);
    s.str("feature", cfg.explain.feature);
    s.str("class", cfg.explain.class_filter);
    s.num("step", cfg.explain.step, 0, 1e9);
    s.num("grid_points", cfg.explain.grid_points, 2, 100000);
    s.num("mi_bins", cfg.explain.mi_bins, 2, 65536);
    s.num("seed", cfg.explain.seed, 0, 1.8e19);
    s.finish();
  }
  if (const json* j = top.get("defense")) {
    Section s(*j, "defense");
    s.str("mode", cfg.defense.mode);
    if (cfg.defense.mode != "advtrain" && cfg.defense.mode != "reduce-both" &&
        cfg.defense.mode != "reduce-forward")
      throw ConfigError("defense.mode: expected reduce-both|reduce-forward|advtrain");
    auto& at = cfg.defense.advtrain;
    s.num("cycles", at.cycles, 1, 1e6);
    s.num("epochs_per_cycle", at.epochs_per_cycle, 1, 1e6);
    s.num("refresh_iters", at.refresh_iters, 1, 1e9);
    s.num("baseline_epochs", at.baseline_epochs, 1, 1e6);
    s.num("kappa", at.kappa, 1e-9, 1e9);
    s.num("refresh_lr", at.refresh_lr, 1e-12, 1e3);
    s.num("seed_iters", at.seed_iters, 1, 1e9);
    s.num("ars_samples", at.ars_samples, 1, 1e9);
    s.finish();
  }
  top.finish();

  // derived wiring: one seed drives every stage unless overridden
  cfg.train.seed = cfg.seed;
  cfg.attack.threads = cfg.threads;
  cfg.ars.threads = cfg.threads;
  cfg.defense.advtrain.train = cfg.train;
  cfg.defense.advtrain.ars = cfg.ars;
  cfg.defense.advtrain.threads = cfg.threads;
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  json j{
      {"seed", seed},
      {"threads", threads},
      {"paths", {{"dataset", paths.dataset}, {"model", paths.model}, {"out_dir", paths.out_dir}}},
      {"synth",
       {{"benign", synth.benign},
        {"dos", synth.dos},
        {"scan", synth.scan},
        {"slow", synth.slow},
        {"bot", synth.bot},
        {"min_len", synth.min_len},
        {"max_len", synth.max_len}}},
      {"train",
       {{"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"learning_rate", train.learning_rate},
        {"layers", train.layers},
        {"hidden", train.hidden},
        {"feature_dropout", train.feature_dropout},
        {"dropout_prob", train.dropout_prob},
        {"label_smoothing", train.label_smoothing},
        {"input_noise_std", train.input_noise_std}}},
      {"attack",
       {{"method", attack_method_name(attack.method)},
        {"kappa", attack.cw.kappa},
        {"delta", attack.cw.delta},
        {"base_lr", attack.cw.base_lr},
        {"base_iters", attack.cw.base_iters},
        {"base_kappa", attack.cw.base_kappa},
        {"max_iters", attack.cw.max_iters},
        {"pgd_epsilon", attack.pgd.epsilon},
        {"pgd_iters", attack.pgd.iters},
        {"pgd_step", attack.pgd.step},
        {"fgsm_epsilon", attack.fgsm_epsilon}}},
      {"ars",
       {{"kappa0", ars.kappa0},
        {"growth", ars.growth},
        {"max_rounds", ars.max_rounds},
        {"kappa", ars.cw.kappa},
        {"delta", ars.cw.delta},
        {"base_lr", ars.cw.base_lr},
        {"base_iters", ars.cw.base_iters},
        {"base_kappa", ars.cw.base_kappa},
        {"max_iters", ars.cw.max_iters}}},
      {"explain",
       {{"method", explain.method},
        {"feature", explain.feature},
        {"class", explain.class_filter},
        {"step", explain.step},
        {"grid_points", explain.grid_points},
        {"mi_bins", explain.mi_bins},
        {"seed", explain.seed}}},
      {"defense",
       {{"mode", defense.mode},
        {"cycles", defense.advtrain.cycles},
        {"epochs_per_cycle", defense.advtrain.epochs_per_cycle},
        {"refresh_iters", defense.advtrain.refresh_iters},
        {"baseline_epochs", defense.advtrain.baseline_epochs},
        {"kappa", defense.advtrain.kappa},
        {"refresh_lr", defense.advtrain.refresh_lr},
        {"seed_iters", defense.advtrain.seed_iters},
        {"ars_samples", defense.advtrain.ars_samples}}},
  };
  return j.dump(2) + "\n";
}

std::uint64_t RunConfig::config_hash() const { return fnv1a(to_json_text()); }

std::string Manifest::to_json_text() const {
  json j{{"subcommand", subcommand}, {"config_hash", hex64(config_hash)},
         {"seed", seed},             {"version", version},
         {"inputs", inputs},         {"outputs", outputs}};
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& out_dir, const Manifest& m) {
  std::filesystem::create_directories(out_dir);
  write_file_text((std::filesystem::path(out_dir) / ("manifest_" + m.subcommand + ".json")).string(),
                  m.to_json_text());
}

}  // namespace flowids
