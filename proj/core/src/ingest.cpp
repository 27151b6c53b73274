#include "flowids/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "flowids/util.hpp"

namespace flowids {

namespace {

const std::vector<std::string>& expected_columns() {
  static const std::vector<std::string> cols = {
      "flow_hint", "timestamp", "src_ip", "dst_ip", "src_port", "dst_port", "protocol",
      "packet_length", "fin", "syn", "rst", "psh", "ack", "urg", "ece", "cwr", "ns",
      "label", "attack_type", "fully_controlled"};
  return cols;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, std::size_t line, const std::string& col) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw DataError("line " + std::to_string(line) + ": bad value '" + s + "' in column " + col);
  return v;
}

long parse_int(const std::string& s, std::size_t line, const std::string& col, long lo, long hi) {
  long v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw DataError("line " + std::to_string(line) + ": bad value '" + s + "' in column " + col);
  if (v < lo || v > hi)
    throw DataError("line " + std::to_string(line) + ": column " + col + " out of range [" +
                    std::to_string(lo) + "," + std::to_string(hi) + "]: " + s);
  return v;
}

}  // namespace

std::vector<PacketRecord> parse_packet_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input: missing CSV header");

  const auto header = split_csv_line(line);
  const auto& expected = expected_columns();
  for (const auto& col : header) {
    if (std::find(expected.begin(), expected.end(), col) == expected.end())
      throw DataError("unknown column: " + col);
  }
  for (const auto& col : expected) {
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw DataError("missing column: " + col);
  }
  std::vector<std::size_t> pos(expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    pos[i] = static_cast<std::size_t>(
        std::find(header.begin(), header.end(), expected[i]) - header.begin());

  std::vector<PacketRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("line " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    auto f = [&](std::size_t i) -> const std::string& { return fields[pos[i]]; };

    PacketRecord r;
    r.line = lineno;
    r.flow_hint = f(0);
    r.timestamp = parse_double(f(1), lineno, "timestamp");
    r.key.src_ip = f(2);
    r.key.dst_ip = f(3);
    r.key.src_port = static_cast<std::uint16_t>(parse_int(f(4), lineno, "src_port", 0, 65535));
    r.key.dst_port = static_cast<std::uint16_t>(parse_int(f(5), lineno, "dst_port", 0, 65535));
    r.key.protocol = static_cast<std::uint8_t>(parse_int(f(6), lineno, "protocol", 0, 255));
    r.packet_length = parse_double(f(7), lineno, "packet_length");
    if (r.packet_length < 0)
      throw DataError("line " + std::to_string(lineno) + ": negative packet_length");
    for (int i = 0; i < 9; ++i)
      r.flags[static_cast<std::size_t>(i)] = static_cast<double>(
          parse_int(f(8 + static_cast<std::size_t>(i)), lineno, expected[8 + static_cast<std::size_t>(i)], 0, 1));
    r.label = parse_int(f(17), lineno, "label", 0, 1) == 1 ? Label::kAttack : Label::kBenign;
    r.attack_type = f(18);
    r.fully_controlled = parse_int(f(19), lineno, "fully_controlled", 0, 1) == 1;
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PacketRecord> parse_packet_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return parse_packet_csv(in);
}

namespace {

// Direction-insensitive grouping key: endpoints ordered lexicographically.
std::string canonical_key(const FlowKey& k) {
  const std::string a = k.src_ip + ":" + std::to_string(k.src_port);
  const std::string b = k.dst_ip + ":" + std::to_string(k.dst_port);
  if (a <= b) return a + "|" + b + "|" + std::to_string(k.protocol);
  return b + "|" + a + "|" + std::to_string(k.protocol);
}

}  // namespace

std::string FlowKey::to_string() const {
  return src_ip + ":" + std::to_string(src_port) + ">" + dst_ip + ":" +
         std::to_string(dst_port) + "/" + std::to_string(protocol);
}

std::vector<Flow> assemble_flows(const std::vector<PacketRecord>& records) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<const PacketRecord*>> groups;

  for (const auto& r : records) {
    const std::string key = r.flow_hint.empty() ? canonical_key(r.key) : ("#" + r.flow_hint);
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&r);
  }

  std::vector<Flow> flows;
  flows.reserve(groups.size());
  for (auto& group : groups) {
    std::stable_sort(group.begin(), group.end(),
                     [](const PacketRecord* a, const PacketRecord* b) {
                       return a->timestamp < b->timestamp;
                     });
    const PacketRecord& first = *group.front();

    Flow fl;
    fl.key = first.key;
    fl.label = first.label;
    fl.attack_type = first.attack_type;
    fl.fully_controlled = first.fully_controlled;
    fl.packets.reserve(group.size());

    double prev_ts = first.timestamp;
    for (const PacketRecord* rp : group) {
      const PacketRecord& r = *rp;
      if (r.key.protocol != first.key.protocol)
        throw DataError("line " + std::to_string(r.line) +
                        ": conflicting protocol within flow " + fl.key.to_string());
      if (r.label != first.label)
        throw DataError("line " + std::to_string(r.line) +
                        ": conflicting label within flow " + fl.key.to_string());
      const bool fwd = r.key.src_ip == first.key.src_ip && r.key.src_port == first.key.src_port &&
                       r.key.dst_ip == first.key.dst_ip && r.key.dst_port == first.key.dst_port;

      PacketFeatureVector p;
      p[kSrcPort] = static_cast<double>(first.key.src_port);
      p[kDstPort] = static_cast<double>(first.key.dst_port);
      p[kProtocol] = static_cast<double>(first.key.protocol);
      p[kPacketLength] = r.packet_length;
      p[kIat] = rp == group.front() ? 0.0 : r.timestamp - prev_ts;
      p[kDirection] = fwd ? kDirForward : kDirReverse;
      for (int i = 0; i < 9; ++i) p[kFlagFin + i] = r.flags[static_cast<std::size_t>(i)];
      fl.packets.push_back(p);
      prev_ts = r.timestamp;
    }
    flows.push_back(std::move(fl));
  }
  return flows;
}

std::size_t Dataset::packet_count() const {
  std::size_t n = 0;
  for (const auto& f : flows) n += f.packets.size();
  return n;
}

std::size_t Dataset::count_label(Label l) const {
  std::size_t n = 0;
  for (const auto& f : flows) n += f.label == l ? 1 : 0;
  return n;
}

bool ClassFilter::matches(const Flow& fl) const {
  switch (kind) {
    case kAll: return true;
    case kBenignOnly: return fl.label == Label::kBenign;
    case kAttackOnly: return fl.label == Label::kAttack;
    case kAttackType: return fl.label == Label::kAttack && fl.attack_type == attack_type;
  }
  return false;
}

ClassFilter ClassFilter::parse(const std::string& s) {
  if (s.empty() || s == "all") return all();
  if (s == "benign") return benign();
  if (s == "attack") return attacks();
  return type(s);
}

std::string ClassFilter::to_string() const {
  switch (kind) {
    case kAll: return "all";
    case kBenignOnly: return "benign";
    case kAttackOnly: return "attack";
    case kAttackType: return attack_type;
  }
  return "?";
}

}  // namespace flowids
