#include "flowids/dataset.hpp"

#include <cmath>

#include "flowids/util.hpp"

namespace flowids {

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::uint64_t seed) {
  if (ds.flow_count() < 3) throw DataError("split_dataset: need at least 3 flows");

  std::vector<std::size_t> benign_idx, attack_idx;
  for (std::size_t i = 0; i < ds.flows.size(); ++i)
    (ds.flows[i].is_attack() ? attack_idx : benign_idx).push_back(i);

  Rng rng(seed);
  rng.shuffle(benign_idx);
  rng.shuffle(attack_idx);

  std::vector<bool> in_train(ds.flows.size(), false);
  auto assign = [&](const std::vector<std::size_t>& idx) {
    const auto n_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(idx.size()) * 2.0 / 3.0));
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
  };
  assign(benign_idx);
  assign(attack_idx);

  Dataset train, test;
  train.schema = ds.schema;
  test.schema = ds.schema;
  train.split_tag = SplitTag::kTrain;
  test.split_tag = SplitTag::kTest;
  for (std::size_t i = 0; i < ds.flows.size(); ++i)
    (in_train[i] ? train : test).flows.push_back(ds.flows[i]);

  if (train.flows.empty() || test.flows.empty())
    throw DataError("split_dataset: a split side would be empty");
  return {std::move(train), std::move(test)};
}

namespace {

constexpr char kMagic[8] = {'F', 'I', 'D', 'S', 'D', 'A', 'T', 'A'};
constexpr std::uint32_t kVersionTag = 1;

void write_schema(ByteWriter& w, const FeatureSchema& s) {
  w.u32(static_cast<std::uint32_t>(s.names.size()));
  for (std::size_t i = 0; i < s.names.size(); ++i) {
    w.str(s.names[i]);
    w.u8(s.flow_constant[i] ? 1 : 0);
    w.u8(s.manipulable[i] ? 1 : 0);
    w.u8(s.active[i] ? 1 : 0);
  }
  w.u8(static_cast<std::uint8_t>(s.reduction));
}

FeatureSchema read_schema(ByteReader& r) {
  FeatureSchema s;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    s.names.push_back(r.str());
    s.flow_constant.push_back(r.u8() != 0);
    s.manipulable.push_back(r.u8() != 0);
    s.active.push_back(r.u8() != 0);
  }
  s.reduction = static_cast<Reduction>(r.u8());
  s.validate();
  return s;
}

void write_stats(ByteWriter& w, const NormalizationStats& st) {
  w.u32(static_cast<std::uint32_t>(st.mean.size()));
  for (double v : st.mean) w.f64(v);
  for (double v : st.std) w.f64(v);
}

NormalizationStats read_stats(ByteReader& r) {
  NormalizationStats st;
  const std::uint32_t n = r.u32();
  st.mean.resize(n);
  st.std.resize(n);
  for (auto& v : st.mean) v = r.f64();
  for (auto& v : st.std) v = r.f64();
  return st;
}

}  // namespace

std::vector<std::uint8_t> serialize_dataset(const DatasetCache& cache) {
  ByteWriter w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kVersionTag);
  write_schema(w, cache.dataset.schema);
  w.u8(cache.stats.has_value() ? 1 : 0);
  if (cache.stats) write_stats(w, *cache.stats);
  w.u8(static_cast<std::uint8_t>(cache.dataset.split_tag));
  w.u64(cache.dataset.flows.size());
  for (const auto& fl : cache.dataset.flows) {
    w.str(fl.key.src_ip);
    w.str(fl.key.dst_ip);
    w.u16(fl.key.src_port);
    w.u16(fl.key.dst_port);
    w.u8(fl.key.protocol);
    w.u8(static_cast<std::uint8_t>(fl.label));
    w.str(fl.attack_type);
    w.u8(fl.fully_controlled ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(fl.packets.size()));
    for (const auto& p : fl.packets)
      for (int j = 0; j < kNumFeatures; ++j) w.f64(p[j]);
  }
  return std::move(w.out);
}

DatasetCache deserialize_dataset(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.need(sizeof(kMagic));
  if (std::string(reinterpret_cast<const char*>(r.p), sizeof(kMagic)) !=
      std::string(kMagic, sizeof(kMagic)))
    throw DataError("dataset cache: bad magic");
  r.pos += sizeof(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kVersionTag)
    throw DataError("dataset cache: unsupported version " + std::to_string(version));

  DatasetCache cache;
  cache.dataset.schema = read_schema(r);
  if (r.u8() != 0) cache.stats = read_stats(r);
  cache.dataset.split_tag = static_cast<SplitTag>(r.u8());
  const std::uint64_t nflows = r.u64();
  cache.dataset.flows.reserve(nflows);
  for (std::uint64_t i = 0; i < nflows; ++i) {
    Flow fl;
    fl.key.src_ip = r.str();
    fl.key.dst_ip = r.str();
    fl.key.src_port = r.u16();
    fl.key.dst_port = r.u16();
    fl.key.protocol = r.u8();
    fl.label = static_cast<Label>(r.u8());
    fl.attack_type = r.str();
    fl.fully_controlled = r.u8() != 0;
    const std::uint32_t np = r.u32();
    fl.packets.resize(np);
    for (auto& p : fl.packets)
      for (int j = 0; j < kNumFeatures; ++j) p[j] = r.f64();
    cache.dataset.flows.push_back(std::move(fl));
  }
  return cache;
}

void save_dataset(const std::string& path, const DatasetCache& cache) {
  write_file_bytes(path, serialize_dataset(cache));
}

DatasetCache load_dataset(const std::string& path) {
  return deserialize_dataset(read_file_bytes(path));
}

}  // namespace flowids
