#pragma once

#include <cstdint>

#include "flowids/flow.hpp"

namespace flowids {

/// Desk-scale synthetic traffic generator. Every class has a documented,
/// planted signature (see README "Synthetic testbed") expressed through a
/// mix of manipulable (length, IAT) and non-manipulable (ports, flags,
/// direction pattern) features, so attacks, explanations and defenses all
/// have something real to find:
///
///   benign  - mixed web/dns/keepalive/burst/upload traffic; the second
///             packet is always a reverse-direction response.
///   dos     - near-constant tiny IAT, fixed 120-byte length, all-forward
///             after the opening SYN, PSH on every data packet.
///   scan    - single bare SYN to a random high port (>= 16384).
///   slow    - long IATs (5..15 s), small packets, all-forward.
///   bot     - fully controlled beacon on port 443: strict fwd/rev
///             alternation, constant sizes, ~1 s period, PSH everywhere
///             including the first packet (no other class sets PSH at
///             step 0).
///   exfil   - UDP flows to a high port (39999) that mirror benign DNS
///             traffic in every other respect; the destination port is
///             their only tell, so removing it is unrecoverable.
///
/// dst_port is the planted signature feature (exfil and scan carry no
/// other tell); src_port is pure noise.
struct SynthConfig {
  std::size_t benign = 600;
  std::size_t dos = 150;
  std::size_t scan = 120;
  std::size_t slow = 150;
  std::size_t bot = 120;
  std::size_t exfil = 60;
  std::size_t min_len = 3;   // non-scan flow length range
  std::size_t max_len = 12;

  std::size_t total() const { return benign + dos + scan + slow + bot + exfil; }
};

/// Deterministic under (config, seed). Throws DataError if zero flows are
/// requested or the length range is invalid.
Dataset synth_generate(const SynthConfig& config, std::uint64_t seed);

}  // namespace flowids
