#include "flowids/adam.hpp"

#include <cmath>

#include "flowids/util.hpp"

namespace flowids {

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamHyper& hyper) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n)
    throw DataError("adam_step: shape mismatch");
  for (double g : grads)
    if (!std::isfinite(g)) throw DataError("adam_step: non-finite gradient");

  state.t += 1;
  const double b1t = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double b2t = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grads[i];
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    params[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
  }
}

}  // namespace flowids
