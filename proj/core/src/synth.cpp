#include "flowids/synth.hpp"

#include <algorithm>
#include <string>

#include "flowids/util.hpp"

namespace flowids {

namespace {

constexpr double kTcp = 6.0;
constexpr double kUdp = 17.0;

struct FlagSet {
  bool fin = false, syn = false, rst = false, psh = false, ack = false;
};

PacketFeatureVector make_packet(const Flow& fl, double length, double iat, double direction,
                                const FlagSet& fs) {
  PacketFeatureVector p;
  p[kSrcPort] = static_cast<double>(fl.key.src_port);
  p[kDstPort] = static_cast<double>(fl.key.dst_port);
  p[kProtocol] = static_cast<double>(fl.key.protocol);
  p[kPacketLength] = length;
  p[kIat] = iat;
  p[kDirection] = direction;
  if (fl.key.protocol == 6) { // flags only meaningful for TCP
    p[kFlagFin] = fs.fin ? 1.0 : 0.0;
    p[kFlagSyn] = fs.syn ? 1.0 : 0.0;
    p[kFlagRst] = fs.rst ? 1.0 : 0.0;
    p[kFlagPsh] = fs.psh ? 1.0 : 0.0;
    p[kFlagAck] = fs.ack ? 1.0 : 0.0;
  }
  return p;
}

double exp_draw(Rng& rng, double mean, double lo, double hi) {
  const double v = -mean * std::log(1.0 - rng.uniform());
  return std::clamp(v, lo, hi);
}

// Density rising from lo to hi (power-law in the uniform draw). Used to
// grade benign mass so it thins out toward the attack signatures instead
// of stopping at a hard wall.
double ramp_draw(Rng& rng, double lo, double hi, double k = 0.7) {
  return lo + (hi - lo) * std::pow(rng.uniform(), k);
}

FlowKey make_key(std::size_t id, std::uint16_t src_port, std::uint16_t dst_port, double proto,
                 const char* server_net) {
  FlowKey k;
  k.src_ip = "10." + std::to_string((id >> 8) & 0xff) + "." + std::to_string(id & 0xff) + ".2";
  k.dst_ip = std::string(server_net) + "." + std::to_string((id >> 8) & 0xff) + "." +
             std::to_string(id & 0xff);
  k.src_port = src_port;
  k.dst_port = dst_port;
  k.protocol = static_cast<std::uint8_t>(proto);
  return k;
}

std::uint16_t noise_port(Rng& rng) {
  return static_cast<std::uint16_t>(rng.uniform_int(1024, 65535));
}

std::size_t draw_len(Rng& rng, const SynthConfig& cfg, std::size_t lo_min) {
  const std::size_t lo = std::max(cfg.min_len, lo_min);
  return static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo),
                                                  static_cast<std::int64_t>(cfg.max_len)));
}

// Benign traffic. The one structural rule every subtype obeys: the second
// packet is the responder's reply, and at least one more reverse packet
// appears later in the flow. dos/slow traffic may also see a step-1 reply
// but never a later one, so no single step separates the classes.
Flow gen_benign(Rng& rng, const SynthConfig& cfg, std::size_t id) {
  Flow fl;
  fl.label = Label::kBenign;

  const double r = rng.uniform();
  // subtype mix; chatty/keepalive/push deliberately border the dos/slow/bot
  // signatures so decision boundaries sit close to the attack clusters, as
  // they do in dense full-scale traffic
  enum { kWeb, kKeepalive, kBurst, kUpload, kPush, kChatty, kUdpSub } sub;
  if (r < 0.27) sub = kWeb;
  else if (r < 0.39) sub = kKeepalive;
  else if (r < 0.50) sub = kBurst;
  else if (r < 0.57) sub = kUpload;
  else if (r < 0.69) sub = kPush;
  else if (r < 0.80) sub = kChatty;
  else sub = kUdpSub;

  std::uint16_t dport = 80;
  switch (sub) {
    case kWeb: dport = rng.uniform() < 0.5 ? 80 : (rng.uniform() < 0.6 ? 443 : 8080); break;
    case kKeepalive: dport = rng.uniform() < 0.5 ? 443 : 8080; break;
    case kBurst: dport = rng.uniform() < 0.5 ? 80 : 8080; break;
    case kUpload: dport = rng.uniform() < 0.5 ? 80 : 443; break;
    case kPush: dport = 443; break;
    case kChatty: dport = rng.uniform() < 0.5 ? 80 : 8080; break;
    case kUdpSub: dport = 53; break;
  }
  fl.key = make_key(id, noise_port(rng), dport, sub == kUdpSub ? kUdp : kTcp, "192.168");

  const std::size_t n = draw_len(rng, cfg, 3);
  auto data_len = [&]() -> double {
    switch (sub) {
      case kWeb: return rng.uniform(100.0, 1400.0);
      case kKeepalive: return ramp_draw(rng, 100.0, 800.0);
      case kBurst: return rng.uniform(200.0, 1400.0);
      case kUpload: return rng.uniform(400.0, 1400.0);
      case kPush: return ramp_draw(rng, 140.0, 600.0);
      case kChatty: return ramp_draw(rng, 160.0, 1400.0);
      case kUdpSub: return rng.uniform(60.0, 500.0);
    }
    return 0.0;
  };
  auto data_iat = [&]() -> double {
    switch (sub) {
      case kWeb: return exp_draw(rng, 0.05, 0.0002, 2.0);
      case kKeepalive: return rng.uniform(5.0, 15.0);
      case kBurst: return rng.uniform(0.0005, 0.01);
      case kUpload: return rng.uniform(0.01, 0.1);
      case kPush: return rng.uniform(0.5, 2.0);
      case kChatty: return exp_draw(rng, 0.004, 0.0002, 0.05);
      case kUdpSub: return exp_draw(rng, 0.05, 0.0002, 2.0);
    }
    return 0.0;
  };
  const double p_rev = sub == kWeb ? 0.45
                       : sub == kKeepalive ? 0.5
                       : sub == kBurst ? 0.3
                       : sub == kUpload ? 0.1
                       : sub == kPush ? 0.8
                       : sub == kChatty ? 0.15
                       : 0.5;

  // a response is guaranteed somewhere after the handshake
  const std::size_t forced_rev =
      static_cast<std::size_t>(rng.uniform_int(2, static_cast<std::int64_t>(n) - 1));

  for (std::size_t i = 0; i < n; ++i) {
    if (sub == kUdpSub) {
      const double dir = (i == 1 || i == forced_rev)
                             ? kDirReverse
                             : i == 0 ? kDirForward
                                      : (rng.bernoulli(p_rev) ? kDirReverse : kDirForward);
      fl.packets.push_back(make_packet(fl, data_len(), i == 0 ? 0.0 : data_iat(), dir, {}));
      continue;
    }
    FlagSet fs;
    double len, dir, iat = i == 0 ? 0.0 : data_iat();
    if (i == 0) { // client SYN (push clients piggyback a PSH)
      fs.syn = true;
      fs.psh = sub == kPush;
      len = rng.uniform(40.0, 60.0);
      dir = kDirForward;
    } else if (i == 1) { // server SYN+ACK (push services may carry data)
      fs.syn = true;
      fs.ack = true;
      fs.psh = sub == kPush && rng.bernoulli(0.35);
      len = rng.uniform(40.0, 60.0);
      dir = kDirReverse;
    } else {
      fs.ack = true;
      fs.psh = rng.bernoulli(sub == kPush ? 0.7 : sub == kChatty ? 0.9 : 0.5);
      fs.fin = i == n - 1 && rng.bernoulli(0.5);
      len = data_len();
      dir = i == forced_rev ? kDirReverse
                            : (rng.bernoulli(p_rev) ? kDirReverse : kDirForward);
    }
    fl.packets.push_back(make_packet(fl, len, iat, dir, fs));
  }
  return fl;
}

// DoS: opening SYN (half the victims still manage a SYN+ACK), then a
// forward-only train of fixed 120-byte PSH packets at a near-constant
// ~1 ms interval, against a port benign traffic also uses. No reverse
// packet ever appears after step 1.
Flow gen_dos(Rng& rng, const SynthConfig& cfg, std::size_t id) {
  Flow fl;
  fl.label = Label::kAttack;
  fl.attack_type = "dos";
  fl.key = make_key(id, noise_port(rng), 8080, kTcp, "192.168");

  const std::size_t n = draw_len(rng, cfg, 3);
  const bool victim_acks = rng.bernoulli(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    FlagSet fs;
    double len;
    double dir = kDirForward;
    if (i == 0) {
      fs.syn = true;
      len = rng.uniform(40.0, 60.0);
    } else if (i == 1 && victim_acks) {
      fs.syn = true;
      fs.ack = true;
      len = rng.uniform(40.0, 60.0);
      dir = kDirReverse;
    } else {
      fs.psh = true;
      fs.ack = true;
      len = 120.0;
    }
    const double iat = i == 0 ? 0.0 : std::clamp(rng.normal(0.001, 0.0002), 0.0001, 0.003);
    fl.packets.push_back(make_packet(fl, len, iat, dir, fs));
  }
  return fl;
}

// Scan: one bare SYN to a random high port, sized like any opening SYN.
// The port is the flow's only tell once lengths are out of the picture.
Flow gen_scan(Rng& rng, std::size_t id) {
  Flow fl;
  fl.label = Label::kAttack;
  fl.attack_type = "scan";
  const auto dport = static_cast<std::uint16_t>(rng.uniform_int(16384, 65535));
  fl.key = make_key(id, noise_port(rng), dport, kTcp, "192.168");
  FlagSet fs;
  fs.syn = true;
  fl.packets.push_back(make_packet(fl, rng.uniform(40.0, 60.0), 0.0, kDirForward, fs));
  return fl;
}

// Slow: trickle of small forward packets at 5..15 s spacing. Like dos,
// half the flows get a step-1 reply and nothing reverse after that.
Flow gen_slow(Rng& rng, const SynthConfig& cfg, std::size_t id) {
  Flow fl;
  fl.label = Label::kAttack;
  fl.attack_type = "slow";
  fl.key = make_key(id, noise_port(rng), 8080, kTcp, "192.168");

  const std::size_t n = draw_len(rng, cfg, 3);
  const bool victim_acks = rng.bernoulli(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    FlagSet fs;
    double len;
    double dir = kDirForward;
    double iat = i == 0 ? 0.0 : rng.uniform(5.0, 15.0);
    if (i == 0) {
      fs.syn = true;
      len = rng.uniform(40.0, 60.0);
    } else if (i == 1 && victim_acks) {
      fs.syn = true;
      fs.ack = true;
      len = rng.uniform(40.0, 60.0);
      dir = kDirReverse;
      iat = std::clamp(rng.normal(0.001, 0.0003), 0.0001, 0.003);
    } else {
      fs.ack = true;
      len = rng.uniform(60.0, 80.0);
    }
    fl.packets.push_back(make_packet(fl, len, iat, dir, fs));
  }
  return fl;
}

// Exfiltration disguised as DNS: UDP with benign-looking sizes, timing and
// directions, but pointed at a high port no benign service uses. The port
// is the one feature that gives it away.
Flow gen_exfil(Rng& rng, const SynthConfig& cfg, std::size_t id) {
  Flow fl;
  fl.label = Label::kAttack;
  fl.attack_type = "exfil";
  fl.key = make_key(id, noise_port(rng), 39999, kUdp, "192.168");

  const std::size_t n = draw_len(rng, cfg, 3);
  const std::size_t forced_rev =
      static_cast<std::size_t>(rng.uniform_int(2, static_cast<std::int64_t>(n) - 1));
  for (std::size_t i = 0; i < n; ++i) {
    const double dir = (i == 1 || i == forced_rev)
                           ? kDirReverse
                           : i == 0 ? kDirForward
                                    : (rng.bernoulli(0.5) ? kDirReverse : kDirForward);
    const double len = rng.uniform(60.0, 500.0);
    const double iat = i == 0 ? 0.0 : exp_draw(rng, 0.05, 0.0002, 2.0);
    fl.packets.push_back(make_packet(fl, len, iat, dir, {}));
  }
  return fl;
}

// Bot beacon: fully controlled, strict fwd/rev alternation at a ~1 s
// period with constant sizes; PSH on every packet including both the first
// and, unlike any benign flow, the second.
Flow gen_bot(Rng& rng, const SynthConfig& cfg, std::size_t id) {
  Flow fl;
  fl.label = Label::kAttack;
  fl.attack_type = "bot";
  fl.fully_controlled = true;
  fl.key = make_key(id, noise_port(rng), 443, kTcp, "192.168");

  const std::size_t n = std::max<std::size_t>(4, draw_len(rng, cfg, 4));
  for (std::size_t i = 0; i < n; ++i) {
    FlagSet fs;
    fs.psh = true;
    fs.ack = i > 0;
    fs.syn = i == 0;
    const double dir = i % 2 == 0 ? kDirForward : kDirReverse;
    const double len = dir == kDirForward ? 80.0 : 120.0;
    const double iat = i == 0 ? 0.0 : std::clamp(rng.normal(1.0, 0.05), 0.8, 1.2);
    fl.packets.push_back(make_packet(fl, len, iat, dir, fs));
  }
  return fl;
}

}  // namespace

Dataset synth_generate(const SynthConfig& config, std::uint64_t seed) {
  if (config.total() == 0) throw DataError("synth_generate: zero flows requested");
  if (config.min_len < 1 || config.max_len < config.min_len)
    throw DataError("synth_generate: invalid flow length range");

  Rng rng(seed);
  Dataset ds;
  ds.schema = FeatureSchema::canonical();

  std::size_t id = 0;
  for (std::size_t i = 0; i < config.benign; ++i) ds.flows.push_back(gen_benign(rng, config, id++));
  for (std::size_t i = 0; i < config.dos; ++i) ds.flows.push_back(gen_dos(rng, config, id++));
  for (std::size_t i = 0; i < config.scan; ++i) ds.flows.push_back(gen_scan(rng, id++));
  for (std::size_t i = 0; i < config.slow; ++i) ds.flows.push_back(gen_slow(rng, config, id++));
  for (std::size_t i = 0; i < config.bot; ++i) ds.flows.push_back(gen_bot(rng, config, id++));
  for (std::size_t i = 0; i < config.exfil; ++i) ds.flows.push_back(gen_exfil(rng, config, id++));
  return ds;
}

}  // namespace flowids
