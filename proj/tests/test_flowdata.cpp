#include "doctest.h"

#include <sstream>

#include "flowids/dataset.hpp"
#include "flowids/ingest.hpp"
#include "flowids/normalize.hpp"
#include "flowids/synth.hpp"
#include "flowids/util.hpp"
#include "test_util.hpp"

using namespace flowids;

namespace {

const char* kHeader =
    "flow_hint,timestamp,src_ip,dst_ip,src_port,dst_port,protocol,packet_length,"
    "fin,syn,rst,psh,ack,urg,ece,cwr,ns,label,attack_type,fully_controlled\n";

std::string row(const std::string& hint, double ts, const std::string& sip,
                const std::string& dip, int sp, int dp, int proto, double len,
                const std::string& flags9 = "0,1,0,0,0,0,0,0,0", int label = 1,
                const std::string& type = "dos", int fc = 0) {
  std::ostringstream ss;
  ss << hint << ',' << ts << ',' << sip << ',' << dip << ',' << sp << ',' << dp << ',' << proto
     << ',' << len << ',' << flags9 << ',' << label << ',' << type << ',' << fc << "\n";
  return ss.str();
}

}  // namespace

TEST_CASE("parse_packet_csv: header plus two valid rows") {
  std::istringstream in(kHeader + row("", 0.0, "10.0.0.1", "10.0.0.2", 1234, 80, 6, 100) +
                        row("", 0.5, "10.0.0.1", "10.0.0.2", 1234, 80, 6, 200));
  const auto records = parse_packet_csv(in);
  REQUIRE(records.size() == 2);
  CHECK(records[0].timestamp == 0.0);
  CHECK(records[1].packet_length == 200.0);
  CHECK(records[0].key.src_port == 1234);
}

TEST_CASE("parse_packet_csv: header only gives empty list") {
  std::istringstream in(kHeader);
  CHECK(parse_packet_csv(in).empty());
}

TEST_CASE("parse_packet_csv: negative packet_length names the line") {
  std::istringstream in(kHeader + row("", 0.0, "a", "b", 1, 2, 6, 100) +
                        row("", 1.0, "a", "b", 1, 2, 6, -5));
  try {
    parse_packet_csv(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("negative packet_length") != std::string::npos);
  }
}

TEST_CASE("parse_packet_csv: unknown column is named") {
  std::istringstream in("timestamp,oops\n1,2\n");
  try {
    parse_packet_csv(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("oops") != std::string::npos);
  }
}

TEST_CASE("parse_packet_csv: malformed row reports the line number") {
  std::istringstream in(std::string(kHeader) + "not,enough,fields\n");
  try {
    parse_packet_csv(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("assemble_flows: IAT computed per flow, first packet zero") {
  // three same-key packets at t = 0.0, 0.5, 0.5 -> IATs [0, 0.5, 0]
  std::istringstream in(kHeader + row("", 0.0, "a", "b", 1, 2, 6, 100) +
                        row("", 0.5, "a", "b", 1, 2, 6, 100) +
                        row("", 0.5, "a", "b", 1, 2, 6, 100));
  const auto flows = assemble_flows(parse_packet_csv(in));
  REQUIRE(flows.size() == 1);
  REQUIRE(flows[0].packets.size() == 3);
  CHECK(flows[0].packets[0][kIat] == 0.0);
  CHECK(flows[0].packets[1][kIat] == 0.5);
  CHECK(flows[0].packets[2][kIat] == 0.0);
}

TEST_CASE("assemble_flows: distinct 5-tuples split") {
  std::istringstream in(kHeader + row("", 0.0, "a", "b", 1, 2, 6, 100) +
                        row("", 0.0, "a", "c", 1, 2, 6, 100));
  const auto flows = assemble_flows(parse_packet_csv(in));
  REQUIRE(flows.size() == 2);
  CHECK(flows[0].packets[0][kIat] == 0.0);
  CHECK(flows[1].packets[0][kIat] == 0.0);
}

TEST_CASE("assemble_flows: reply joins the flow as reverse direction") {
  std::istringstream in(kHeader + row("", 0.0, "a", "b", 1, 2, 6, 100) +
                        row("", 0.1, "b", "a", 2, 1, 6, 60));
  const auto flows = assemble_flows(parse_packet_csv(in));
  REQUIRE(flows.size() == 1);
  CHECK(flows[0].packets[0][kDirection] == kDirForward);
  CHECK(flows[0].packets[1][kDirection] == kDirReverse);
  // flow-constant features keep the initiator's orientation
  CHECK(flows[0].packets[1][kSrcPort] == 1.0);
  CHECK(flows[0].packets[1][kDstPort] == 2.0);
}

TEST_CASE("assemble_flows: conflicting protocol within a hinted flow") {
  std::istringstream in(kHeader + row("f1", 0.0, "a", "b", 1, 2, 6, 100) +
                        row("f1", 0.1, "a", "b", 1, 2, 17, 100));
  CHECK_THROWS_AS(assemble_flows(parse_packet_csv(in)), DataError);
}

TEST_CASE("assemble_flows: 5-tuple grouping is a partition") {
  // every record lands in exactly one flow; reversed key maps to the same flow
  std::ostringstream csv;
  csv << kHeader;
  Rng rng(42);
  std::size_t total = 0;
  for (int f = 0; f < 10; ++f) {
    const std::string a = "10.0.0." + std::to_string(f);
    for (int p = 0; p < 5; ++p) {
      const bool rev = rng.bernoulli(0.4) && p > 0;
      ++total;
      csv << row(rev ? "" : "", 0.1 * p, rev ? "b" : a, rev ? a : "b", rev ? 80 : 1000 + f,
                 rev ? 1000 + f : 80, 6, 100);
    }
  }
  std::istringstream in(csv.str());
  const auto flows = assemble_flows(parse_packet_csv(in));
  CHECK(flows.size() == 10);
  std::size_t packets = 0;
  for (const auto& fl : flows) packets += fl.packets.size();
  CHECK(packets == total);
}

TEST_CASE("fit_normalizer: three-point case") {
  Dataset ds;
  ds.schema = FeatureSchema::canonical();
  ds.flows.push_back(testutil::make_flow({{2, 0, 0}, {4, 0.1, 0}, {6, 0.1, 0}}));
  const auto stats = fit_normalizer(ds);
  CHECK(stats.mean[kPacketLength] == doctest::Approx(4.0));
  CHECK(stats.std[kPacketLength] == doctest::Approx(1.63299).epsilon(1e-5));
  const Matrix m = apply_normalizer(stats, ds.flows[0]);
  CHECK(m.at(0, kPacketLength) == doctest::Approx(-1.22474).epsilon(1e-5));
  CHECK(m.at(1, kPacketLength) == doctest::Approx(0.0));
  CHECK(m.at(2, kPacketLength) == doctest::Approx(1.22474).epsilon(1e-5));
}

TEST_CASE("fit_normalizer: constant feature clamps to std 1") {
  Dataset ds;
  ds.schema = FeatureSchema::canonical();
  ds.flows.push_back(testutil::make_flow({{5, 0, 0}, {5, 0.1, 0}, {5, 0.1, 0}}));
  const auto stats = fit_normalizer(ds);
  CHECK(stats.std[kPacketLength] == 1.0);
  const Matrix m = apply_normalizer(stats, ds.flows[0]);
  CHECK(m.at(0, kPacketLength) == 0.0);
  CHECK(m.at(2, kPacketLength) == 0.0);
}

TEST_CASE("fit_normalizer: empty dataset errors") {
  Dataset ds;
  ds.schema = FeatureSchema::canonical();
  CHECK_THROWS_AS(fit_normalizer(ds), DataError);
}

TEST_CASE("normalize round trip is identity within 1e-9 relative") {
  const Dataset ds = synth_generate({.benign = 20, .dos = 10, .scan = 5, .slow = 5, .bot = 5, .exfil = 0}, 3);
  const auto stats = fit_normalizer(ds);
  for (const auto& fl : ds.flows) {
    const Matrix m = apply_normalizer(stats, fl);
    const Flow back = invert_normalizer(stats, m, fl);
    for (std::size_t t = 0; t < fl.packets.size(); ++t)
      for (int j = 0; j < kNumFeatures; ++j) {
        const double a = fl.packets[t][j];
        const double b = back.packets[t][j];
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
      }
  }
}

TEST_CASE("apply_normalizer: dimension mismatch errors") {
  NormalizationStats bad;
  bad.mean.assign(3, 0.0);
  bad.std.assign(3, 1.0);
  CHECK_THROWS_AS(apply_normalizer(bad, testutil::make_flow({{1, 0, 0}})), DataError);
}

TEST_CASE("split_dataset: 9 flows stratified 6/3") {
  Dataset ds;
  ds.schema = FeatureSchema::canonical();
  for (int i = 0; i < 6; ++i) ds.flows.push_back(testutil::make_flow({{50, 0, 0}}, Label::kAttack));
  for (int i = 0; i < 3; ++i) ds.flows.push_back(testutil::make_flow({{700, 0, 0}}, Label::kBenign));
  const auto [train, test] = split_dataset(ds, 11);
  CHECK(train.flow_count() == 6);
  CHECK(test.flow_count() == 3);
  CHECK(train.count_label(Label::kAttack) == 4);
  CHECK(test.count_label(Label::kAttack) == 2);
  CHECK(train.count_label(Label::kBenign) == 2);
  CHECK(test.count_label(Label::kBenign) == 1);
}

TEST_CASE("split_dataset: deterministic under seed, seed changes partition") {
  const Dataset ds = synth_generate({.benign = 150, .dos = 50, .scan = 50, .slow = 25, .bot = 25, .exfil = 0}, 5);
  const auto [a1, b1] = split_dataset(ds, 9);
  const auto [a2, b2] = split_dataset(ds, 9);
  CHECK(a1.flows == a2.flows);
  CHECK(b1.flows == b2.flows);

  const auto [a3, b3] = split_dataset(ds, 10);
  CHECK(a3.flow_count() == 200);
  CHECK(b3.flow_count() == 100);
  CHECK(a1.flow_count() == 200);
  CHECK(!(a1.flows == a3.flows)); // different seed, different membership
}

TEST_CASE("split_dataset: ratio within one flow across sizes") {
  for (std::size_t n : {3u, 4u, 7u, 10u, 33u, 100u}) {
    Dataset ds;
    ds.schema = FeatureSchema::canonical();
    Rng rng(n);
    for (std::size_t i = 0; i < n; ++i)
      ds.flows.push_back(testutil::make_flow({{50, 0, 0}},
                                             rng.bernoulli(0.5) ? Label::kAttack : Label::kBenign));
    const auto [train, test] = split_dataset(ds, 2);
    const double ideal = 2.0 * static_cast<double>(n) / 3.0;
    CHECK(std::abs(static_cast<double>(train.flow_count()) - ideal) <= 1.0);
    CHECK(train.flow_count() + test.flow_count() == n);
  }
  Dataset two;
  two.schema = FeatureSchema::canonical();
  two.flows.push_back(testutil::make_flow({{1, 0, 0}}));
  two.flows.push_back(testutil::make_flow({{1, 0, 0}}));
  CHECK_THROWS_AS(split_dataset(two, 1), DataError);
}

TEST_CASE("synth_generate: counts and labels by construction") {
  const Dataset ds = synth_generate({.benign = 100, .dos = 50, .scan = 0, .slow = 0, .bot = 0, .exfil = 0}, 1);
  CHECK(ds.flow_count() == 150);
  CHECK(ds.count_label(Label::kBenign) == 100);
  CHECK(ds.count_label(Label::kAttack) == 50);
  for (const auto& fl : ds.flows)
    if (fl.is_attack()) CHECK(fl.attack_type == "dos");
}

TEST_CASE("synth_generate: byte-identical under same config+seed") {
  const SynthConfig cfg{.benign = 40, .dos = 20, .scan = 10, .slow = 10, .bot = 10, .exfil = 0};
  const auto b1 = serialize_dataset({synth_generate(cfg, 77), std::nullopt});
  const auto b2 = serialize_dataset({synth_generate(cfg, 77), std::nullopt});
  CHECK(b1 == b2);
  const auto b3 = serialize_dataset({synth_generate(cfg, 78), std::nullopt});
  CHECK(b1 != b3);
}

TEST_CASE("synth_generate: scan flows match the documented rule") {
  const Dataset ds = synth_generate({.benign = 10, .dos = 0, .scan = 40, .slow = 0, .bot = 0, .exfil = 0}, 9);
  for (const auto& fl : ds.flows) {
    if (fl.attack_type != "scan") continue;
    CHECK(fl.packets.size() == 1);
    CHECK(fl.packets[0][kFlagSyn] == 1.0);
    CHECK(fl.packets[0][kDstPort] >= 16384.0);
    CHECK(fl.packets[0][kPacketLength] >= 40.0);
    CHECK(fl.packets[0][kPacketLength] <= 60.0);
  }
}

TEST_CASE("synth_generate: zero flows requested errors") {
  CHECK_THROWS_AS(synth_generate({.benign = 0, .dos = 0, .scan = 0, .slow = 0, .bot = 0, .exfil = 0}, 1),
                  DataError);
}

TEST_CASE("synth invariants: flow-constant features, first-packet IAT, UDP flags") {
  const Dataset ds = synth_generate({.benign = 60, .dos = 20, .scan = 20, .slow = 20, .bot = 20, .exfil = 0}, 13);
  for (const auto& fl : ds.flows) {
    REQUIRE(fl.packets.size() >= 1);
    CHECK(fl.packets[0][kIat] == 0.0);
    for (const auto& p : fl.packets) {
      CHECK(p[kSrcPort] == fl.packets[0][kSrcPort]);
      CHECK(p[kDstPort] == fl.packets[0][kDstPort]);
      CHECK(p[kProtocol] == fl.packets[0][kProtocol]);
      CHECK(p[kIat] >= 0.0);
      if (p[kProtocol] == 17.0)
        for (int f = kFlagFin; f <= kFlagNs; ++f) CHECK(p[f] == 0.0);
    }
    if (fl.attack_type == "bot") CHECK(fl.fully_controlled);
  }
}

TEST_CASE("dataset cache: exact round trip") {
  Dataset ds = synth_generate({.benign = 15, .dos = 5, .scan = 5, .slow = 5, .bot = 5, .exfil = 0}, 21);
  DatasetCache cache{ds, fit_normalizer(ds)};
  const auto bytes = serialize_dataset(cache);
  const DatasetCache back = deserialize_dataset(bytes);
  CHECK(back.dataset.flows == cache.dataset.flows);
  CHECK(back.dataset.schema == cache.dataset.schema);
  CHECK(*back.stats == *cache.stats);
  CHECK(serialize_dataset(back) == bytes);
}

TEST_CASE("dataset cache: bad magic rejected") {
  auto bytes = serialize_dataset({synth_generate({.benign = 3, .dos = 1, .scan = 1, .slow = 1, .bot = 1, .exfil = 0}, 2),
                                  std::nullopt});
  bytes[0] ^= 0xff;
  CHECK_THROWS_AS(deserialize_dataset(bytes), DataError);
}
