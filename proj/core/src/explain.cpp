#include "flowids/explain.hpp"

#include <algorithm>
#include <cmath>

#include "flowids/util.hpp"

namespace flowids {

const char* importance_method_name(ImportanceMethod m) {
  switch (m) {
    case ImportanceMethod::kWeights: return "weights";
    case ImportanceMethod::kPerturbation: return "perturbation";
    case ImportanceMethod::kDropout: return "dropout";
    case ImportanceMethod::kMutualInformation: return "mutual_information";
  }
  return "?";
}

ImportanceTable importance_weights(const Model& model) {
  const auto& params = model.params;
  const auto H = static_cast<std::size_t>(params.hidden());
  const auto L = static_cast<std::size_t>(params.layers());

  // backward sweep of absolute one-step path products, head to inputs;
  // the four gate matrices of a cell count as parallel paths
  std::vector<double> v(H);
  for (std::size_t k = 0; k < H; ++k) v[k] = std::abs(params.head_w()[k]);

  for (std::size_t l = L; l-- > 0;) {
    const auto& lo = params.layout.layer[l];
    const std::size_t D = lo.in_width;
    const double* w = params.flat.data() + lo.w_in;
    std::vector<double> prev(D, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      if (v[h] == 0.0) continue;
      for (int gate = 0; gate < 4; ++gate) {
        const double* row = w + (static_cast<std::size_t>(gate) * H + h) * D;
        for (std::size_t j = 0; j < D; ++j) prev[j] += v[h] * std::abs(row[j]);
      }
    }
    v = std::move(prev);
  }

  ImportanceTable table;
  table.method = ImportanceMethod::kWeights;
  const auto idx = model.schema.active_indices();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    ImportanceEntry e;
    e.feature = idx[k];
    e.name = model.schema.names[static_cast<std::size_t>(idx[k])];
    e.score = v[k]; // dropout models: indicator columns are internals
    table.entries.push_back(e);
  }
  return table;
}

namespace {

double flow_accuracy(const Model& model, const Dataset& data, const FeatureMask& mask = {}) {
  return evaluate(model, data, mask).flow.accuracy;
}

}  // namespace

ImportanceTable importance_perturbation(const Model& model, const Dataset& data,
                                        std::uint64_t seed) {
  const double acc_base = flow_accuracy(model, data);
  const auto idx = model.schema.active_indices();
  const double n_flows = static_cast<double>(data.flow_count());

  ImportanceTable table;
  table.method = ImportanceMethod::kPerturbation;
  Rng master(seed);
  for (int j : idx) {
    const auto ju = static_cast<std::size_t>(j);
    std::vector<double> pool;
    for (const auto& fl : data.flows)
      for (const auto& p : fl.packets) pool.push_back(p[j]);

    Rng rng = master.fork(ju);
    Dataset perturbed = data;
    for (auto& fl : perturbed.flows) {
      if (model.schema.flow_constant[ju]) {
        const double v = pool[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
        for (auto& p : fl.packets) p[j] = v;
      } else {
        for (auto& p : fl.packets)
          p[j] = pool[static_cast<std::size_t>(
              rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
      }
    }
    const double acc = flow_accuracy(model, perturbed);
    ImportanceEntry e;
    e.feature = j;
    e.name = model.schema.names[ju];
    e.score = acc_base - acc;
    e.stderr_ = std::sqrt(std::max(0.0, acc * (1.0 - acc) / n_flows));
    table.entries.push_back(e);
  }
  return table;
}

ImportanceTable importance_dropout(const Model& model, const Dataset& data) {
  if (!model.feature_dropout)
    throw ConfigError("importance_dropout requires a feature-dropout model");
  const double acc_base = flow_accuracy(model, data);
  ImportanceTable table;
  table.method = ImportanceMethod::kDropout;
  for (int j : model.schema.active_indices()) {
    ImportanceEntry e;
    e.feature = j;
    e.name = model.schema.names[static_cast<std::size_t>(j)];
    e.score = acc_base - flow_accuracy(model, data, FeatureMask{j});
    table.entries.push_back(e);
  }
  return table;
}

SharedInfoScore shared_info_from_accuracies(double acc_base, double acc_wo_i, double acc_wo_j,
                                            double acc_wo_both, double tol) {
  SharedInfoScore s;
  s.acc_base = acc_base;
  s.acc_without_i = acc_wo_i;
  s.acc_without_j = acc_wo_j;
  s.acc_without_both = acc_wo_both;
  const double denom = (acc_base - acc_wo_i) + (acc_base - acc_wo_j);
  if (denom <= tol) {
    s.defined = false;
    return s;
  }
  s.score = (acc_base - acc_wo_both) / denom;
  s.defined = true;
  return s;
}

SharedInfoScore shared_info_score(const Model& model, const Dataset& data, int feature_i,
                                  int feature_j) {
  if (!model.feature_dropout)
    throw ConfigError("shared_info_score requires a feature-dropout model");
  const double base = flow_accuracy(model, data);
  const double wo_i = flow_accuracy(model, data, FeatureMask{feature_i});
  const double wo_j = flow_accuracy(model, data, FeatureMask{feature_j});
  const double wo_both = flow_accuracy(model, data, FeatureMask{feature_i, feature_j});
  SharedInfoScore s = shared_info_from_accuracies(base, wo_i, wo_j, wo_both);
  s.feature_i = feature_i;
  s.feature_j = feature_j;
  return s;
}

double mi_from_joint(const std::vector<std::vector<std::uint64_t>>& joint) {
  double n = 0.0;
  for (const auto& row : joint)
    for (auto c : row) n += static_cast<double>(c);
  if (n == 0.0) return 0.0;

  std::vector<double> px(joint.size(), 0.0);
  std::vector<double> py(joint.empty() ? 0 : joint[0].size(), 0.0);
  for (std::size_t x = 0; x < joint.size(); ++x)
    for (std::size_t y = 0; y < joint[x].size(); ++y) {
      px[x] += static_cast<double>(joint[x][y]) / n;
      py[y] += static_cast<double>(joint[x][y]) / n;
    }
  double mi = 0.0;
  for (std::size_t x = 0; x < joint.size(); ++x)
    for (std::size_t y = 0; y < joint[x].size(); ++y) {
      if (joint[x][y] == 0) continue;
      const double pxy = static_cast<double>(joint[x][y]) / n;
      mi += pxy * std::log2(pxy / (px[x] * py[y]));
    }
  return std::max(0.0, mi);
}

namespace {

// Quantile bin edges: upper bounds of the first B-1 bins, deduplicated.
std::vector<double> quantile_edges(std::vector<double> values, int bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> edges;
  const std::size_t n = values.size();
  for (int b = 1; b < bins; ++b) {
    const std::size_t pos = static_cast<std::size_t>(static_cast<double>(n) *
                                                     static_cast<double>(b) /
                                                     static_cast<double>(bins));
    const double e = values[std::min(pos, n - 1)];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  return edges;
}

std::size_t bin_of(const std::vector<double>& edges, double v) {
  return static_cast<std::size_t>(
      std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

}  // namespace

ImportanceTable sensitivity_mutual_information(const Model& model, const Dataset& data,
                                               const MICfg& cfg) {
  // one prediction pass shared by all features
  std::vector<std::vector<double>> confs;
  confs.reserve(data.flows.size());
  std::size_t pairs = 0;
  for (const auto& fl : data.flows) {
    confs.push_back(predict_flow(model, fl).confidence);
    pairs += fl.packets.size();
  }
  if (pairs < cfg.min_pairs)
    throw DataError("sensitivity_mutual_information: need at least " +
                    std::to_string(cfg.min_pairs) + " (feature, prediction) pairs, have " +
                    std::to_string(pairs));

  ImportanceTable table;
  table.method = ImportanceMethod::kMutualInformation;
  for (int j : model.schema.active_indices()) {
    std::vector<double> values;
    values.reserve(pairs);
    for (const auto& fl : data.flows)
      for (const auto& p : fl.packets) values.push_back(p[j]);
    const auto edges = quantile_edges(values, cfg.feature_bins);

    std::vector<std::vector<std::uint64_t>> joint(edges.size() + 1,
                                                  std::vector<std::uint64_t>(2, 0));
    std::size_t vi = 0;
    for (std::size_t fi = 0; fi < data.flows.size(); ++fi)
      for (std::size_t t = 0; t < data.flows[fi].packets.size(); ++t, ++vi)
        joint[bin_of(edges, values[vi])][confs[fi][t] > 0.5 ? 1 : 0] += 1;

    ImportanceEntry e;
    e.feature = j;
    e.name = model.schema.names[static_cast<std::size_t>(j)];
    e.score = mi_from_joint(joint);
    table.entries.push_back(e);
  }
  return table;
}

std::vector<double> quantile_grid(const Dataset& data, const ClassFilter& filter, int feature,
                                  std::size_t points) {
  std::vector<double> values;
  for (const auto& fl : data.flows)
    if (filter.matches(fl))
      for (const auto& p : fl.packets) values.push_back(p[feature]);
  if (values.empty()) throw DataError("quantile_grid: no flows match the class filter");
  std::sort(values.begin(), values.end());

  std::vector<double> grid;
  for (std::size_t i = 0; i < points; ++i) {
    const double q = points == 1 ? 0.0
                                 : static_cast<double>(i) / static_cast<double>(points - 1);
    const auto pos = static_cast<std::size_t>(
        std::llround(q * static_cast<double>(values.size() - 1)));
    const double v = values[pos];
    if (grid.empty() || v > grid.back()) grid.push_back(v);
  }
  return grid;
}

PDPCurve conditional_pdp(const Model& model, const Dataset& data, const ClassFilter& filter,
                         int feature, const std::vector<double>& grid) {
  if (!model.schema.flow_constant[static_cast<std::size_t>(feature)])
    throw ConfigError("conditional_pdp applies to flow-constant features; use sequential_pdp for '" +
                      model.schema.names[static_cast<std::size_t>(feature)] + "'");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1]) throw ConfigError("conditional_pdp: grid must be strictly increasing");

  std::vector<const Flow*> flows;
  for (const auto& fl : data.flows)
    if (filter.matches(fl)) flows.push_back(&fl);
  if (flows.empty()) throw DataError("conditional_pdp: no flows match the class filter");

  PDPCurve curve;
  curve.feature = feature;
  curve.feature_name = model.schema.names[static_cast<std::size_t>(feature)];
  curve.condition = filter.to_string();
  curve.flows_used = flows.size();

  for (double w : grid) {
    PDPPoint pt;
    pt.value = w;
    pt.min = 1.0;
    pt.max = 0.0;
    double sum = 0.0;
    for (const Flow* fl : flows) {
      Flow modified = *fl;
      for (auto& p : modified.packets) p[feature] = w;
      const double conf = predict_flow(model, modified).confidence.back();
      sum += conf;
      pt.min = std::min(pt.min, conf);
      pt.max = std::max(pt.max, conf);
    }
    pt.mean = sum / static_cast<double>(flows.size());
    curve.points.push_back(pt);
  }
  return curve;
}

PDPCurve sequential_pdp(const Model& model, const Dataset& data, const ClassFilter& filter,
                        int feature, std::size_t step, const std::vector<double>& grid) {
  std::vector<const Flow*> flows;
  for (const auto& fl : data.flows)
    if (filter.matches(fl) && fl.length() > step) flows.push_back(&fl);
  if (flows.empty())
    throw DataError("sequential_pdp: no conditioned flow has length > " + std::to_string(step));

  PDPCurve curve;
  curve.feature = feature;
  curve.feature_name = model.schema.names[static_cast<std::size_t>(feature)];
  curve.condition = filter.to_string();
  curve.step = step;
  curve.flows_used = flows.size();

  for (double w : grid) {
    PDPPoint pt;
    pt.value = w;
    pt.min = 1.0;
    pt.max = 0.0;
    double sum = 0.0;
    for (const Flow* fl : flows) {
      Flow modified = *fl;
      modified.packets[step][feature] = w;
      // prediction at the substituted step; the unmodified prefix supplies
      // the hidden state
      const double conf = predict_flow(model, modified).confidence[step];
      sum += conf;
      pt.min = std::min(pt.min, conf);
      pt.max = std::max(pt.max, conf);
    }
    pt.mean = sum / static_cast<double>(flows.size());
    curve.points.push_back(pt);
  }
  return curve;
}

std::vector<StepConfidence> confidence_per_step(const Model& model, const Dataset& data,
                                                const ClassFilter& filter) {
  std::vector<const Flow*> flows;
  std::size_t max_len = 0;
  for (const auto& fl : data.flows)
    if (filter.matches(fl)) {
      flows.push_back(&fl);
      max_len = std::max(max_len, fl.length());
    }
  if (flows.empty()) throw DataError("confidence_per_step: no flows match the class filter");

  std::vector<StepConfidence> out(max_len);
  for (std::size_t t = 0; t < max_len; ++t) out[t].step = t;
  for (const Flow* fl : flows) {
    const auto conf = predict_flow(model, *fl).confidence;
    for (std::size_t t = 0; t < conf.size(); ++t) {
      out[t].mean_confidence += conf[t];
      out[t].count += 1;
    }
  }
  for (auto& s : out) s.mean_confidence /= static_cast<double>(s.count);
  return out;
}

std::vector<StepProfile> feature_sequence_profile(const Dataset& data, const ClassFilter& filter,
                                                  int feature) {
  std::vector<const Flow*> flows;
  std::size_t max_len = 0;
  for (const auto& fl : data.flows)
    if (filter.matches(fl)) {
      flows.push_back(&fl);
      max_len = std::max(max_len, fl.length());
    }
  if (flows.empty()) throw DataError("feature_sequence_profile: no flows match the class filter");

  std::vector<StepProfile> out(max_len);
  for (std::size_t t = 0; t < max_len; ++t) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const Flow* fl : flows)
      if (fl->length() > t) {
        sum += fl->packets[t][feature];
        ++count;
      }
    const double mean = sum / static_cast<double>(count);
    double var = 0.0;
    for (const Flow* fl : flows)
      if (fl->length() > t) {
        const double d = fl->packets[t][feature] - mean;
        var += d * d;
      }
    out[t].step = t;
    out[t].mean = mean;
    out[t].stddev = std::sqrt(var / static_cast<double>(count));
    out[t].count = count;
  }
  return out;
}

}  // namespace flowids
