#include "flowids/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "flowids/util.hpp"

namespace flowids {

ParamLayout::ParamLayout(int L, int H, int D) : layers(L), hidden(H), input_width(D) {
  std::size_t off = 0;
  layer.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    auto& lo = layer[static_cast<std::size_t>(l)];
    lo.in_width = static_cast<std::size_t>(l == 0 ? D : H);
    lo.w_in = off;
    off += 4u * static_cast<std::size_t>(H) * lo.in_width;
    lo.w_rec = off;
    off += 4u * static_cast<std::size_t>(H) * static_cast<std::size_t>(H);
    lo.bias = off;
    off += 4u * static_cast<std::size_t>(H);
  }
  head_w = off;
  off += static_cast<std::size_t>(H);
  head_b = off;
  off += 1;
  total = off;
}

ModelParams init_params(int layers, int hidden, int input_width, std::uint64_t seed) {
  if (layers < 1 || hidden < 1 || input_width < 1)
    throw ConfigError("init_params: dimensions must be >= 1");

  ModelParams p;
  p.layout = ParamLayout(layers, hidden, input_width);
  p.flat.assign(p.layout.total, 0.0);
  p.seed = seed;

  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  const auto H = static_cast<std::size_t>(hidden);
  for (int l = 0; l < layers; ++l) {
    const auto& lo = p.layout.layer[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < 4 * H * lo.in_width; ++i)
      p.flat[lo.w_in + i] = rng.uniform(-bound, bound);
    for (std::size_t i = 0; i < 4 * H * H; ++i)
      p.flat[lo.w_rec + i] = rng.uniform(-bound, bound);
    // biases zero, except the forget gate at +1
    for (std::size_t i = 0; i < H; ++i) p.flat[lo.bias + H + i] = 1.0;
  }
  for (std::size_t i = 0; i < H; ++i) p.flat[p.layout.head_w + i] = rng.uniform(-bound, bound);
  p.flat[p.layout.head_b] = 0.0;
  return p;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ForwardTrace forward(const ModelParams& params, const Matrix& input) {
  const auto L = static_cast<std::size_t>(params.layers());
  const auto H = static_cast<std::size_t>(params.hidden());
  const std::size_t T = input.rows;
  if (T == 0) throw DataError("forward: empty input");
  if (input.cols != static_cast<std::size_t>(params.input_width()))
    throw DataError("forward: input width " + std::to_string(input.cols) + " != model width " +
                    std::to_string(params.input_width()));
  for (double v : input.d)
    if (!std::isfinite(v)) throw DataError("forward: non-finite input");

  ForwardTrace tr;
  tr.input = input;
  tr.layer.resize(L);
  for (auto& lt : tr.layer) {
    lt.gi = Matrix(T, H);
    lt.gf = Matrix(T, H);
    lt.gg = Matrix(T, H);
    lt.go = Matrix(T, H);
    lt.c = Matrix(T, H);
    lt.h = Matrix(T, H);
  }
  tr.logits.resize(T);
  tr.confidence.resize(T);

  std::vector<double> act(4 * H);
  for (std::size_t t = 0; t < T; ++t) {
    const double* x = input.row(t);
    for (std::size_t l = 0; l < L; ++l) {
      auto& lt = tr.layer[l];
      const auto& lo = params.layout.layer[l];
      const std::size_t D = lo.in_width;
      const double* w_in = params.flat.data() + lo.w_in;
      const double* w_rec = params.flat.data() + lo.w_rec;
      const double* bias = params.flat.data() + lo.bias;
      const double* h_prev = t > 0 ? lt.h.row(t - 1) : nullptr;
      const double* c_prev = t > 0 ? lt.c.row(t - 1) : nullptr;

      for (std::size_t r = 0; r < 4 * H; ++r) {
        double a = bias[r];
        const double* wr = w_in + r * D;
        for (std::size_t j = 0; j < D; ++j) a += wr[j] * x[j];
        if (h_prev) {
          const double* ur = w_rec + r * H;
          for (std::size_t j = 0; j < H; ++j) a += ur[j] * h_prev[j];
        }
        act[r] = a;
      }
      double* gi = lt.gi.row(t);
      double* gf = lt.gf.row(t);
      double* gg = lt.gg.row(t);
      double* go = lt.go.row(t);
      double* c = lt.c.row(t);
      double* h = lt.h.row(t);
      for (std::size_t k = 0; k < H; ++k) {
        gi[k] = sigmoid(act[k]);
        gf[k] = sigmoid(act[H + k]);
        gg[k] = std::tanh(act[2 * H + k]);
        go[k] = sigmoid(act[3 * H + k]);
        const double cp = c_prev ? c_prev[k] : 0.0;
        c[k] = gf[k] * cp + gi[k] * gg[k];
        h[k] = go[k] * std::tanh(c[k]);
      }
      x = h; // next layer's input
    }
    const double* top = tr.layer[L - 1].h.row(t);
    double z = params.head_b();
    const double* hw = params.head_w();
    for (std::size_t k = 0; k < H; ++k) z += hw[k] * top[k];
    tr.logits[t] = z;
    tr.confidence[t] = sigmoid(z);
  }
  return tr;
}

namespace {
constexpr double kProbClamp = 1e-7;
}

double bce_loss(const ForwardTrace& trace, const std::vector<double>& labels) {
  const std::size_t T = trace.steps();
  if (labels.size() != T) throw DataError("bce_loss: label/trace length mismatch");
  double sum = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double y = labels[t];
    if (y != 0.0 && y != 1.0) throw DataError("bce_loss: labels must be 0 or 1");
    const double p = std::clamp(trace.confidence[t], kProbClamp, 1.0 - kProbClamp);
    sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return sum / static_cast<double>(T);
}

Gradients backward(const ModelParams& params, const ForwardTrace& trace,
                   const GradObjective& objective) {
  const auto L = static_cast<std::size_t>(params.layers());
  const auto H = static_cast<std::size_t>(params.hidden());
  const std::size_t T = trace.steps();

  // dz: gradient of the objective w.r.t. each step logit
  std::vector<double> dz(T, 0.0);
  switch (objective.kind) {
    case GradObjective::kLoss:
    case GradObjective::kSoftLoss: {
      if (objective.labels.size() != T) throw DataError("backward: label/trace length mismatch");
      for (std::size_t t = 0; t < T; ++t) {
        const double y = objective.labels[t];
        if (objective.kind == GradObjective::kLoss && y != 0.0 && y != 1.0)
          throw DataError("backward: labels must be 0 or 1");
        if (y < 0.0 || y > 1.0) throw DataError("backward: targets must lie in [0, 1]");
        dz[t] = (trace.confidence[t] - y) / static_cast<double>(T);
      }
      break;
    }
    case GradObjective::kFinalLogit:
      dz[T - 1] = 1.0;
      break;
    case GradObjective::kStepLogit:
      if (objective.step >= T) throw DataError("backward: step out of range");
      dz[objective.step] = 1.0;
      break;
    default:
      throw DataError("backward: unknown objective");
  }

  Gradients g;
  g.params.assign(params.flat.size(), 0.0);
  g.inputs = Matrix(T, static_cast<std::size_t>(params.input_width()));

  // carried across time (per layer): dL/dh_t and dL/dc_t from step t+1
  std::vector<std::vector<double>> carry_dh(L, std::vector<double>(H, 0.0));
  std::vector<std::vector<double>> carry_dc(L, std::vector<double>(H, 0.0));
  std::vector<double> da(4 * H);
  std::vector<double> dx_below(std::max<std::size_t>(H, g.inputs.cols));

  double* head_w_grad = g.params.data() + params.layout.head_w;
  double& head_b_grad = g.params[params.layout.head_b];
  const double* head_w = params.head_w();

  for (std::size_t t = T; t-- > 0;) {
    // head
    const double* top = trace.layer[L - 1].h.row(t);
    for (std::size_t k = 0; k < H; ++k) head_w_grad[k] += dz[t] * top[k];
    head_b_grad += dz[t];

    for (std::size_t l = L; l-- > 0;) {
      const auto& lt = trace.layer[l];
      const auto& lo = params.layout.layer[l];
      const std::size_t D = lo.in_width;
      const double* w_in = params.flat.data() + lo.w_in;
      const double* w_rec = params.flat.data() + lo.w_rec;
      double* w_in_grad = g.params.data() + lo.w_in;
      double* w_rec_grad = g.params.data() + lo.w_rec;
      double* bias_grad = g.params.data() + lo.bias;

      const double* gi = lt.gi.row(t);
      const double* gf = lt.gf.row(t);
      const double* gg = lt.gg.row(t);
      const double* go = lt.go.row(t);
      const double* c = lt.c.row(t);
      const double* c_prev = t > 0 ? lt.c.row(t - 1) : nullptr;
      const double* h_prev = t > 0 ? lt.h.row(t - 1) : nullptr;
      const double* x = l == 0 ? trace.input.row(t) : trace.layer[l - 1].h.row(t);

      // dh: from the logit head (top layer), from the layer above
      // (dx_below), and from step t+1 (carry)
      for (std::size_t k = 0; k < H; ++k) {
        double dh = carry_dh[l][k];
        if (l == L - 1) dh += dz[t] * head_w[k];
        else dh += dx_below[k];

        const double tc = std::tanh(c[k]);
        const double do_ = dh * tc;
        double dc = carry_dc[l][k] + dh * go[k] * (1.0 - tc * tc);

        const double cp = c_prev ? c_prev[k] : 0.0;
        const double di = dc * gg[k];
        const double df = dc * cp;
        const double dg = dc * gi[k];

        da[k] = di * gi[k] * (1.0 - gi[k]);
        da[H + k] = df * gf[k] * (1.0 - gf[k]);
        da[2 * H + k] = dg * (1.0 - gg[k] * gg[k]);
        da[3 * H + k] = do_ * go[k] * (1.0 - go[k]);

        carry_dc[l][k] = dc * gf[k];
      }

      // parameter gradients and the two backward projections
      std::fill(carry_dh[l].begin(), carry_dh[l].end(), 0.0);
      std::fill(dx_below.begin(), dx_below.begin() + static_cast<std::ptrdiff_t>(D), 0.0);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double d = da[r];
        if (d == 0.0) continue;
        double* wg = w_in_grad + r * D;
        const double* wr = w_in + r * D;
        for (std::size_t j = 0; j < D; ++j) {
          wg[j] += d * x[j];
          dx_below[j] += d * wr[j];
        }
        if (h_prev) {
          double* ug = w_rec_grad + r * H;
          const double* ur = w_rec + r * H;
          for (std::size_t j = 0; j < H; ++j) {
            ug[j] += d * h_prev[j];
            carry_dh[l][j] += d * ur[j];
          }
        }
        bias_grad[r] += d;
      }

      if (l == 0) {
        double* in_grad = g.inputs.row(t);
        for (std::size_t j = 0; j < D; ++j) in_grad[j] += dx_below[j];
      }
    }
  }
  return g;
}

std::vector<double> backward_params(const ModelParams& params, const ForwardTrace& trace,
                                    const std::vector<double>& labels) {
  return backward(params, trace, GradObjective::loss(labels)).params;
}

Matrix backward_inputs(const ModelParams& params, const ForwardTrace& trace,
                       const GradObjective& objective) {
  return backward(params, trace, objective).inputs;
}

}  // namespace flowids
