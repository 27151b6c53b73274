#include "flowids/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "flowids/adam.hpp"
#include "flowids/util.hpp"

namespace flowids {

int Model::expected_width() const {
  const int n = schema.active_count();
  return feature_dropout ? 2 * n : n;
}

Matrix flow_to_input(const Flow& flow, const FeatureSchema& schema,
                     const NormalizationStats& stats, bool dropout_inputs,
                     const FeatureMask& mask) {
  const auto idx = schema.active_indices();
  const std::size_t n = idx.size();
  const std::size_t width = dropout_inputs ? 2 * n : n;
  if (!dropout_inputs && !mask.empty())
    throw ConfigError("feature mask given for a model without missing-feature inputs");

  Matrix m(flow.packets.size(), width);
  for (std::size_t t = 0; t < flow.packets.size(); ++t) {
    const auto& p = flow.packets[t];
    const bool zero_manip = schema.reduction == Reduction::kAttackerDirectionOnly && p.forward();
    for (std::size_t k = 0; k < n; ++k) {
      const int j = idx[k];
      const auto ju = static_cast<std::size_t>(j);
      double v = (p[j] - stats.mean[ju]) / stats.std[ju];
      if (zero_manip && schema.manipulable[ju]) v = 0.0;
      if (mask.count(j)) {
        m.at(t, k) = 0.0;
        m.at(t, n + k) = 1.0;
      } else {
        m.at(t, k) = v;
      }
    }
  }
  return m;
}

namespace {

std::vector<double> flow_labels(const Flow& fl) {
  return std::vector<double>(fl.packets.size(), fl.is_attack() ? 1.0 : 0.0);
}

struct TrainerState {
  ModelParams params;
  AdamState adam;
  AdamHyper hyper;
};

// One pass over the training set in seeded shuffled order; flows are
// processed individually (no padding), batch gradient = sum over the
// batch's flows.
EpochStats run_epoch(TrainerState& st, const std::vector<const Flow*>& flows,
                     const FeatureSchema& schema, const NormalizationStats& stats,
                     const TrainConfig& cfg, bool dropout_mode, double drop_p, Rng& rng,
                     std::uint32_t epoch) {
  std::vector<std::size_t> order(flows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  const auto active = schema.active_indices();
  std::vector<double> batch_grad(st.params.flat.size(), 0.0);
  std::size_t in_batch = 0;

  double loss_sum = 0.0;
  std::size_t correct = 0;

  auto flush = [&]() {
    if (in_batch == 0) return;
    adam_step(st.params.flat, batch_grad, st.adam, st.hyper);
    std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
    in_batch = 0;
  };

  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const Flow& fl = *flows[order[oi]];
    FeatureMask mask;
    if (dropout_mode)
      for (int j : active)
        if (rng.bernoulli(drop_p)) mask.insert(j);

    Matrix input = flow_to_input(fl, schema, stats, dropout_mode, mask);
    if (cfg.input_noise_std > 0.0) {
      // noise on the feature slots only; indicators and masked-out slots
      // keep their exact 0/1 semantics
      const std::size_t n_slots = active.size();
      for (std::size_t t = 0; t < input.rows; ++t)
        for (std::size_t k = 0; k < n_slots; ++k)
          if (!mask.count(active[k])) input.at(t, k) += cfg.input_noise_std * rng.normal();
    }
    const ForwardTrace trace = forward(st.params, input);
    const auto labels = flow_labels(fl);
    loss_sum += bce_loss(trace, labels);
    const bool predicted_attack = trace.confidence.back() > 0.5;
    if (predicted_attack == fl.is_attack()) ++correct;

    std::vector<double> targets = labels;
    if (cfg.label_smoothing > 0.0)
      for (auto& y : targets) y = y * (1.0 - cfg.label_smoothing) + (1.0 - y) * cfg.label_smoothing;
    const Gradients g = backward(st.params, trace, GradObjective::soft_loss(targets));
    for (std::size_t i = 0; i < batch_grad.size(); ++i) batch_grad[i] += g.params[i];
    if (++in_batch >= cfg.batch_size) flush();
  }
  flush();

  EpochStats es;
  es.epoch = epoch;
  es.loss = loss_sum / static_cast<double>(flows.size());
  es.accuracy = static_cast<double>(correct) / static_cast<double>(flows.size());
  return es;
}

TrainResult train_impl(const Dataset& data, const NormalizationStats& stats,
                       const TrainConfig& cfg, bool dropout_mode) {
  if (data.flows.empty()) throw DataError("train: empty dataset");
  data.schema.validate();
  if (cfg.batch_size == 0) throw ConfigError("train: batch_size must be >= 1");

  const int n_active = data.schema.active_count();
  const int width = dropout_mode ? 2 * n_active : n_active;
  const double drop_p = cfg.dropout_prob > 0.0 ? cfg.dropout_prob : 1.0 / n_active;
  if (drop_p >= 1.0) throw ConfigError("train: dropout probability must be < 1");

  TrainerState st;
  st.params = init_params(cfg.layers, cfg.hidden, width, cfg.seed);
  st.params.feature_dropout = dropout_mode;
  st.adam = AdamState::zeros(st.params.flat.size());
  st.hyper.lr = cfg.learning_rate;

  std::vector<const Flow*> flows;
  flows.reserve(data.flows.size());
  for (const auto& fl : data.flows) flows.push_back(&fl);

  Rng rng(cfg.seed ^ 0x5eedf00dULL);
  TrainResult result;
  for (std::uint32_t e = 0; e < cfg.epochs; ++e)
    result.history.push_back(
        run_epoch(st, flows, data.schema, stats, cfg, dropout_mode, drop_p, rng, e));

  st.params.epochs = cfg.epochs;
  result.model.params = std::move(st.params);
  result.model.schema = data.schema;
  result.model.stats = stats;
  result.model.feature_dropout = dropout_mode;
  return result;
}

}  // namespace

TrainResult train(const Dataset& train_data, const NormalizationStats& stats,
                  const TrainConfig& config) {
  return train_impl(train_data, stats, config, false);
}

TrainResult train_feature_dropout(const Dataset& train_data, const NormalizationStats& stats,
                                  const TrainConfig& config) {
  return train_impl(train_data, stats, config, true);
}

TrainResult resume_training(const Model& start, const Dataset& train_data,
                            const NormalizationStats& stats, const TrainConfig& config) {
  if (train_data.flows.empty()) throw DataError("resume_training: empty dataset");
  if (start.feature_dropout)
    throw ConfigError("resume_training supports regular models only");

  TrainerState st;
  st.params = start.params;
  st.adam = AdamState::zeros(st.params.flat.size());
  st.hyper.lr = config.learning_rate;

  std::vector<const Flow*> flows;
  flows.reserve(train_data.flows.size());
  for (const auto& fl : train_data.flows) flows.push_back(&fl);

  Rng rng(config.seed ^ 0x5eedf00dULL);
  TrainResult result;
  for (std::uint32_t e = 0; e < config.epochs; ++e)
    result.history.push_back(
        run_epoch(st, flows, start.schema, stats, config, false, 0.0, rng, e));

  st.params.epochs += config.epochs;
  result.model = start;
  result.model.params = std::move(st.params);
  return result;
}

Prediction predict_flow(const Model& model, const Flow& flow, const FeatureMask& mask) {
  if (!model.feature_dropout && !mask.empty())
    throw ConfigError("predict_flow: mask requires a feature-dropout model");
  const Matrix input = flow_to_input(flow, model.schema, model.stats, model.feature_dropout, mask);
  const ForwardTrace trace = forward(model.params, input);
  Prediction p;
  p.confidence = trace.confidence;
  p.final_logit = trace.logits.back();
  p.flow_attack = trace.confidence.back() > 0.5; // exact tie counts as benign
  return p;
}

double dataset_loss(const Model& model, const Dataset& data) {
  if (data.flows.empty()) throw DataError("dataset_loss: empty dataset");
  double sum = 0.0;
  for (const auto& fl : data.flows) {
    const Matrix input = flow_to_input(fl, model.schema, model.stats, model.feature_dropout, {});
    sum += bce_loss(forward(model.params, input), flow_labels(fl));
  }
  return sum / static_cast<double>(data.flows.size());
}

MetricSet metrics_from_counts(const ConfusionCounts& c) {
  MetricSet m;
  const double total = static_cast<double>(c.total());
  m.accuracy = total > 0 ? static_cast<double>(c.tp + c.tn) / total : 0.0;

  const double pred_pos = static_cast<double>(c.tp + c.fp);
  const double actual_pos = static_cast<double>(c.tp + c.fn);
  const double actual_neg = static_cast<double>(c.tn + c.fp);

  if (pred_pos > 0) m.precision = static_cast<double>(c.tp) / pred_pos;
  else m.degenerate = true;
  if (actual_pos > 0) m.recall = static_cast<double>(c.tp) / actual_pos;
  else m.degenerate = true;
  const double specificity = actual_neg > 0 ? static_cast<double>(c.tn) / actual_neg : 0.0;
  if (actual_neg == 0) m.degenerate = true;

  if (m.precision + m.recall > 0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  m.youden_j = m.recall + specificity - 1.0;
  return m;
}

MetricsReport evaluate(const Model& model, const Dataset& data, const FeatureMask& mask) {
  if (data.flows.empty()) throw DataError("evaluate: empty dataset");
  MetricsReport r;
  for (const auto& fl : data.flows) {
    const Prediction p = predict_flow(model, fl, mask);
    const bool is_attack = fl.is_attack();
    for (double conf : p.confidence) {
      const bool pred = conf > 0.5;
      if (pred && is_attack) ++r.packet_counts.tp;
      else if (pred && !is_attack) ++r.packet_counts.fp;
      else if (!pred && is_attack) ++r.packet_counts.fn;
      else ++r.packet_counts.tn;
    }
    if (p.flow_attack && is_attack) ++r.flow_counts.tp;
    else if (p.flow_attack && !is_attack) ++r.flow_counts.fp;
    else if (!p.flow_attack && is_attack) ++r.flow_counts.fn;
    else ++r.flow_counts.tn;
  }
  r.packet = metrics_from_counts(r.packet_counts);
  r.flow = metrics_from_counts(r.flow_counts);
  return r;
}

}  // namespace flowids
