#pragma once

#include <cstdint>
#include <string>

namespace flowids {

/// Central finite-difference verification of the BPTT gradients on a tiny
/// randomized model. Used by tests and by `flowids gradcheck`.
struct GradCheckConfig {
  int layers = 2;
  int hidden = 4;
  int input_width = 6;
  std::size_t steps = 5;
  double fd_step = 1e-5;
};

struct GradCheckReport {
  double max_rel_param = 0.0;  // loss objective, all parameters
  double max_rel_input = 0.0;  // loss + final-logit objectives, all inputs
  std::size_t params_checked = 0;
  std::size_t inputs_checked = 0;

  bool pass(double tol = 1e-4) const {
    return max_rel_param < tol && max_rel_input < tol;
  }
  std::string summary() const;
};

GradCheckReport grad_check(std::uint64_t seed, const GradCheckConfig& config = {});

/// Relative error with a floor so near-zero pairs compare absolutely.
double rel_error(double a, double b, double floor = 1e-6);

}  // namespace flowids
