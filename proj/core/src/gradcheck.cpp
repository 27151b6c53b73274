#include "flowids/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flowids/lstm.hpp"
#include "flowids/util.hpp"

namespace flowids {

double rel_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

GradCheckReport grad_check(std::uint64_t seed, const GradCheckConfig& config) {
  Rng rng(seed);
  ModelParams params = init_params(config.layers, config.hidden, config.input_width,
                                   rng.next_u64());
  // spread parameters a little so no gradient path is degenerate
  for (auto& w : params.flat) w += 0.1 * rng.normal();

  Matrix input(config.steps, static_cast<std::size_t>(config.input_width));
  for (auto& v : input.d) v = rng.normal();
  std::vector<double> labels(config.steps);
  for (auto& y : labels) y = rng.bernoulli(0.5) ? 1.0 : 0.0;

  const double h = config.fd_step;
  GradCheckReport rep;

  ForwardTrace trace = forward(params, input);
  const Gradients analytic = backward(params, trace, GradObjective::loss(labels));

  auto loss_at = [&](const ModelParams& p, const Matrix& x) {
    return bce_loss(forward(p, x), labels);
  };

  for (std::size_t i = 0; i < params.flat.size(); ++i) {
    ModelParams p = params;
    p.flat[i] += h;
    const double up = loss_at(p, input);
    p.flat[i] -= 2 * h;
    const double dn = loss_at(p, input);
    const double fd = (up - dn) / (2 * h);
    rep.max_rel_param = std::max(rep.max_rel_param, rel_error(analytic.params[i], fd));
  }
  rep.params_checked = params.flat.size();

  const Gradients analytic_z = backward(params, trace, GradObjective::final_logit());
  auto logit_at = [&](const Matrix& x) { return forward(params, x).logits.back(); };

  for (std::size_t i = 0; i < input.size(); ++i) {
    Matrix x = input;
    x.d[i] += h;
    const double up_l = loss_at(params, x);
    const double up_z = logit_at(x);
    x.d[i] -= 2 * h;
    const double dn_l = loss_at(params, x);
    const double dn_z = logit_at(x);
    const double fd_l = (up_l - dn_l) / (2 * h);
    const double fd_z = (up_z - dn_z) / (2 * h);
    rep.max_rel_input = std::max(rep.max_rel_input, rel_error(analytic.inputs.d[i], fd_l));
    rep.max_rel_input = std::max(rep.max_rel_input, rel_error(analytic_z.inputs.d[i], fd_z));
  }
  rep.inputs_checked = input.size();
  return rep;
}

std::string GradCheckReport::summary() const {
  std::ostringstream ss;
  ss << "grad_check: max rel err params=" << max_rel_param << " (" << params_checked
     << " checked), inputs=" << max_rel_input << " (" << inputs_checked << " checked)";
  return ss.str();
}

}  // namespace flowids
