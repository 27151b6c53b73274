#pragma once

#include <cstdint>
#include <vector>

#include "flowids/attacks.hpp"

namespace flowids {

/// Average of the ceil(N/2) smallest distances; infinity when fewer than
/// half the samples have finite distance. Throws DataError on empty input.
double ars_from_distances(const std::vector<double>& distances);

struct ArsSchedule {
  double kappa0 = 0.25;
  double growth = 2.0;
  std::size_t max_rounds = 100;
  CWConfig cw; // kappa is overwritten per round
  int threads = 1;
};

struct ArsRound {
  std::size_t round = 0;
  double kappa = 0.0;
  std::size_t adversarial = 0;
  double candidate_ars = 0.0; // inf until enough samples are adversarial
};

struct RobustnessReport {
  double ars = 0.0;                  // finite or inf
  std::size_t samples = 0;
  double adversarial_ratio = 0.0;
  std::vector<double> distances;     // per-sample best, inf allowed
  std::vector<ArsRound> rounds;      // kappa schedule actually used
  std::uint64_t iterations = 0;      // total CW iterations consumed
};

/// Iterative kappa escalation: attack every not-yet-successful sample with
/// CW at the current kappa, keep per-sample best distances, stop when at
/// least ceil(N/2) samples are adversarial and the still-unsuccessful
/// samples' achieved distances can no longer enter the median set. Samples
/// must be attack-labeled; throws DataError on an empty set.
RobustnessReport compute_ars(const Model& model, const std::vector<Flow>& samples,
                             const ArsSchedule& schedule);

}  // namespace flowids
