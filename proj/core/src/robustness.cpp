#include "flowids/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowids/util.hpp"

namespace flowids {

double ars_from_distances(const std::vector<double>& distances) {
  if (distances.empty()) throw DataError("ars_from_distances: empty input");
  for (double d : distances)
    if (std::isnan(d) || d < 0.0) throw DataError("ars_from_distances: distances must be >= 0");

  std::vector<double> sorted = distances;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t half = (sorted.size() + 1) / 2; // ceil(N/2)
  double sum = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    if (std::isinf(sorted[i])) return std::numeric_limits<double>::infinity();
    sum += sorted[i];
  }
  return sum / static_cast<double>(half);
}

RobustnessReport compute_ars(const Model& model, const std::vector<Flow>& samples,
                             const ArsSchedule& schedule) {
  if (samples.empty()) throw DataError("compute_ars: empty sample set");
  for (const auto& fl : samples)
    if (!fl.is_attack()) throw DataError("compute_ars: samples must be attack-labeled");

  const std::size_t n = samples.size();
  const std::size_t half = (n + 1) / 2;
  const double inf = std::numeric_limits<double>::infinity();

  RobustnessReport rep;
  rep.samples = n;
  rep.distances.assign(n, inf);
  std::vector<double> attempted(n, 0.0);

  double kappa = schedule.kappa0;
  for (std::size_t round = 0; round < schedule.max_rounds; ++round) {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < n; ++i)
      if (std::isinf(rep.distances[i])) pending.push_back(i);

    std::vector<AdversarialResult> results(pending.size());
    CWConfig cw = schedule.cw;
    cw.kappa = kappa;
    parallel_for(pending.size(), schedule.threads, [&](std::size_t k) {
      results[k] = cw_attack(model, samples[pending[k]], cw);
    });
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const auto& res = results[k];
      rep.iterations += res.iterations;
      attempted[pending[k]] = res.attempted_l1;
      if (res.success && res.l1 < rep.distances[pending[k]])
        rep.distances[pending[k]] = res.l1;
    }

    std::size_t adversarial = 0;
    for (double d : rep.distances) adversarial += std::isinf(d) ? 0 : 1;

    ArsRound r;
    r.round = round;
    r.kappa = kappa;
    r.adversarial = adversarial;
    r.candidate_ars = ars_from_distances(rep.distances);
    rep.rounds.push_back(r);

    if (adversarial >= half) {
      // median set is stable once no still-unsuccessful sample's achieved
      // distance could undercut the ceil(N/2)-th smallest success
      std::vector<double> finite;
      for (double d : rep.distances)
        if (!std::isinf(d)) finite.push_back(d);
      std::sort(finite.begin(), finite.end());
      const double cutoff = finite[half - 1];
      bool stable = true;
      for (std::size_t i = 0; i < n; ++i)
        if (std::isinf(rep.distances[i]) && attempted[i] < cutoff) {
          stable = false;
          break;
        }
      if (stable) break;
    }
    kappa *= schedule.growth;
  }

  std::size_t adversarial = 0;
  for (double d : rep.distances) adversarial += std::isinf(d) ? 0 : 1;
  rep.adversarial_ratio = static_cast<double>(adversarial) / static_cast<double>(n);
  rep.ars = adversarial >= half ? ars_from_distances(rep.distances) : inf;
  return rep;
}

}  // namespace flowids
