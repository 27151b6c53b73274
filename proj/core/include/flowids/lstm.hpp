#pragma once

#include <cstdint>
#include <vector>

#include "flowids/matrix.hpp"

namespace flowids {

/// Where in the flat parameter vector each block lives. Per layer, gate
/// rows are packed [input, forget, cell, output] x hidden.
struct ParamLayout {
  int layers = 0;
  int hidden = 0;
  int input_width = 0;

  struct LayerOffsets {
    std::size_t w_in = 0;   // 4H x D_l
    std::size_t w_rec = 0;  // 4H x H
    std::size_t bias = 0;   // 4H
    std::size_t in_width = 0;
  };
  std::vector<LayerOffsets> layer;
  std::size_t head_w = 0; // H
  std::size_t head_b = 0; // 1
  std::size_t total = 0;

  ParamLayout() = default;
  ParamLayout(int L, int H, int D);
};

/// Stacked-LSTM parameters plus the scalar logit head, stored flat so the
/// optimizer, serializer and finite-difference checks can treat the model
/// as one vector.
struct ModelParams {
  ParamLayout layout;
  std::vector<double> flat;

  // training metadata carried with the parameters
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;
  bool feature_dropout = false;
  bool hardened = false; // produced by adversarial training

  int layers() const { return layout.layers; }
  int hidden() const { return layout.hidden; }
  int input_width() const { return layout.input_width; }

  double* w_in(int l) { return flat.data() + layout.layer[l].w_in; }
  const double* w_in(int l) const { return flat.data() + layout.layer[l].w_in; }
  double* w_rec(int l) { return flat.data() + layout.layer[l].w_rec; }
  const double* w_rec(int l) const { return flat.data() + layout.layer[l].w_rec; }
  double* bias(int l) { return flat.data() + layout.layer[l].bias; }
  const double* bias(int l) const { return flat.data() + layout.layer[l].bias; }
  double* head_w() { return flat.data() + layout.head_w; }
  const double* head_w() const { return flat.data() + layout.head_w; }
  double& head_b() { return flat[layout.head_b]; }
  double head_b() const { return flat[layout.head_b]; }
};

/// Uniform init in +-1/sqrt(H), forget-gate bias +1, deterministic under
/// seed. Throws ConfigError on zero dimensions.
ModelParams init_params(int layers, int hidden, int input_width, std::uint64_t seed);

/// Everything forward computes, kept for the backward pass: per layer the
/// post-activation gates, cell and hidden states, plus per-step logits and
/// confidences. Recomputing forward from the same inputs reproduces a
/// trace bit-exactly.
struct ForwardTrace {
  struct LayerTrace {
    Matrix gi, gf, gg, go; // T x H, post-activation
    Matrix c, h;           // T x H
  };
  Matrix input;                   // T x D copy
  std::vector<LayerTrace> layer;
  std::vector<double> logits;     // T
  std::vector<double> confidence; // sigma(logit), attack probability

  std::size_t steps() const { return logits.size(); }
};

/// Throws DataError on width mismatch or non-finite input.
ForwardTrace forward(const ModelParams& params, const Matrix& input);

/// Mean per-step binary cross-entropy, probabilities clamped to
/// [1e-7, 1-1e-7] before the log. Labels must be 0/1.
double bce_loss(const ForwardTrace& trace, const std::vector<double>& labels);

/// Scalar objective whose input/parameter gradient backward computes.
/// kSoftLoss is the training-loop variant that admits smoothed targets in
/// [0, 1]; kLoss requires hard 0/1 labels.
struct GradObjective {
  enum Kind { kLoss, kSoftLoss, kFinalLogit, kStepLogit } kind = kLoss;
  std::vector<double> labels; // for kLoss / kSoftLoss
  std::size_t step = 0;       // for kStepLogit

  static GradObjective loss(std::vector<double> y) { return {kLoss, std::move(y), 0}; }
  static GradObjective soft_loss(std::vector<double> y) { return {kSoftLoss, std::move(y), 0}; }
  static GradObjective final_logit() { return {kFinalLogit, {}, 0}; }
  static GradObjective step_logit(std::size_t t) { return {kStepLogit, {}, t}; }
};

struct Gradients {
  std::vector<double> params; // same layout as ModelParams.flat
  Matrix inputs;              // T x D
};

/// Full BPTT: exact reverse-mode gradients of the objective with respect
/// to every parameter and every input entry.
Gradients backward(const ModelParams& params, const ForwardTrace& trace,
                   const GradObjective& objective);

/// Parameter gradients of the mean-BCE loss (backward, parameters part).
std::vector<double> backward_params(const ModelParams& params, const ForwardTrace& trace,
                                    const std::vector<double>& labels);

/// Input gradients of the chosen objective (backward, inputs part).
Matrix backward_inputs(const ModelParams& params, const ForwardTrace& trace,
                       const GradObjective& objective);

double sigmoid(double x);

}  // namespace flowids
