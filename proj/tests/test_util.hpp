#pragma once

// Shared helpers for building small flows, datasets and models in tests.

#include <string>
#include <vector>

#include "flowids/classifier.hpp"
#include "flowids/flow.hpp"
#include "flowids/normalize.hpp"
#include "flowids/synth.hpp"
#include "flowids/util.hpp"

namespace flowids::testutil {

inline Flow make_flow(std::vector<std::array<double, 3>> len_iat_dir, Label label = Label::kAttack,
                      const std::string& type = "dos", bool fully_controlled = false) {
  Flow fl;
  fl.key = {"10.0.0.2", "192.168.0.9", 40000, 8080, 6};
  fl.label = label;
  fl.attack_type = label == Label::kAttack ? type : "";
  fl.fully_controlled = fully_controlled;
  for (const auto& [len, iat, dir] : len_iat_dir) {
    PacketFeatureVector p;
    p[kSrcPort] = 40000;
    p[kDstPort] = 8080;
    p[kProtocol] = 6;
    p[kPacketLength] = len;
    p[kIat] = iat;
    p[kDirection] = dir;
    p[kFlagAck] = 1;
    fl.packets.push_back(p);
  }
  return fl;
}

/// Identity normalization: mean 0, std 1 for every feature, so raw and
/// normalized space coincide in hand-computed tests.
inline NormalizationStats identity_stats() {
  NormalizationStats s;
  s.mean.assign(kNumFeatures, 0.0);
  s.std.assign(kNumFeatures, 1.0);
  return s;
}

inline Model make_model(int layers, int hidden, std::uint64_t seed,
                        NormalizationStats stats = identity_stats()) {
  Model m;
  m.schema = FeatureSchema::canonical();
  m.stats = std::move(stats);
  m.params = init_params(layers, hidden, m.schema.active_count(), seed);
  return m;
}

inline Model zero_model(int layers = 1, int hidden = 4) {
  Model m = make_model(layers, hidden, 1);
  for (auto& w : m.params.flat) w = 0.0;
  return m;
}

/// A small separable dataset (planted rule: attack iff packet_length below
/// 100 and tiny IAT) for fast training tests.
inline Dataset tiny_separable_dataset(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.schema = FeatureSchema::canonical();
  for (std::size_t i = 0; i < per_class; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 3));
    std::vector<std::array<double, 3>> benign, attack;
    for (std::size_t t = 0; t < n; ++t) {
      const double dir = t % 2 == 0 ? kDirForward : kDirReverse;
      benign.push_back({rng.uniform(400.0, 1200.0), t == 0 ? 0.0 : rng.uniform(0.01, 0.2), dir});
      attack.push_back({rng.uniform(40.0, 90.0), t == 0 ? 0.0 : rng.uniform(0.0005, 0.002),
                        kDirForward});
    }
    Flow b = make_flow(benign, Label::kBenign);
    b.key.src_port = static_cast<std::uint16_t>(1024 + i);
    Flow a = make_flow(attack, Label::kAttack, "dos");
    a.key.src_port = static_cast<std::uint16_t>(30000 + i);
    ds.flows.push_back(b);
    ds.flows.push_back(a);
  }
  return ds;
}

}  // namespace flowids::testutil
