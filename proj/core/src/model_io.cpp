#include "flowids/model_io.hpp"

#include "flowids/util.hpp"

namespace flowids {

namespace {

constexpr char kParamMagic[4] = {'F', 'R', 'N', 'N'};
constexpr char kModelMagic[4] = {'F', 'M', 'D', 'L'};
constexpr std::uint32_t kParamVersion = 1;
constexpr std::uint32_t kModelVersion = 1;

void check_magic(ByteReader& r, const char* magic, const char* what) {
  r.need(4);
  for (int i = 0; i < 4; ++i)
    if (r.p[r.pos + static_cast<std::size_t>(i)] != static_cast<std::uint8_t>(magic[i]))
      throw DataError(std::string(what) + ": bad magic");
  r.pos += 4;
}

}  // namespace

namespace {
ModelParams deserialize_params_from(ByteReader& r);
}

std::vector<std::uint8_t> serialize_params(const ModelParams& params) {
  ByteWriter w;
  w.raw(kParamMagic, 4);
  w.u32(kParamVersion);
  w.u32(static_cast<std::uint32_t>(params.layers()));
  w.u32(static_cast<std::uint32_t>(params.hidden()));
  w.u32(static_cast<std::uint32_t>(params.input_width()));
  w.u8(params.feature_dropout ? 1 : 0);
  w.u8(params.hardened ? 1 : 0);
  w.u64(params.seed);
  w.u32(params.epochs);
  w.u64(params.flat.size());
  for (double v : params.flat) w.f64(v);
  return std::move(w.out);
}

ModelParams deserialize_params(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  return deserialize_params_from(r);
}

namespace {

ModelParams deserialize_params_from(ByteReader& r) {
  check_magic(r, kParamMagic, "model parameters");
  const std::uint32_t version = r.u32();
  if (version != kParamVersion)
    throw DataError("model parameters: unsupported version " + std::to_string(version));
  const auto layers = static_cast<int>(r.u32());
  const auto hidden = static_cast<int>(r.u32());
  const auto width = static_cast<int>(r.u32());
  if (layers < 1 || hidden < 1 || width < 1)
    throw DataError("model parameters: bad dimensions");
  ModelParams p;
  p.layout = ParamLayout(layers, hidden, width);
  p.feature_dropout = r.u8() != 0;
  p.hardened = r.u8() != 0;
  p.seed = r.u64();
  p.epochs = r.u32();
  const std::uint64_t n = r.u64();
  if (n != p.layout.total)
    throw DataError("model parameters: dimension mismatch (expected " +
                    std::to_string(p.layout.total) + " values, file has " + std::to_string(n) +
                    ")");
  p.flat.resize(n);
  for (auto& v : p.flat) v = r.f64();
  return p;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  ByteWriter w;
  w.raw(kModelMagic, 4);
  w.u32(kModelVersion);

  w.u32(static_cast<std::uint32_t>(model.schema.names.size()));
  for (std::size_t i = 0; i < model.schema.names.size(); ++i) {
    w.str(model.schema.names[i]);
    w.u8(model.schema.flow_constant[i] ? 1 : 0);
    w.u8(model.schema.manipulable[i] ? 1 : 0);
    w.u8(model.schema.active[i] ? 1 : 0);
  }
  w.u8(static_cast<std::uint8_t>(model.schema.reduction));

  w.u32(static_cast<std::uint32_t>(model.stats.mean.size()));
  for (double v : model.stats.mean) w.f64(v);
  for (double v : model.stats.std) w.f64(v);

  w.u8(model.feature_dropout ? 1 : 0);

  const auto pb = serialize_params(model.params);
  w.u64(pb.size());
  w.raw(pb.data(), pb.size());
  return std::move(w.out);
}

Model deserialize_model(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  check_magic(r, kModelMagic, "model file");
  const std::uint32_t version = r.u32();
  if (version != kModelVersion)
    throw DataError("model file: unsupported version " + std::to_string(version));

  Model m;
  const std::uint32_t nf = r.u32();
  for (std::uint32_t i = 0; i < nf; ++i) {
    m.schema.names.push_back(r.str());
    m.schema.flow_constant.push_back(r.u8() != 0);
    m.schema.manipulable.push_back(r.u8() != 0);
    m.schema.active.push_back(r.u8() != 0);
  }
  m.schema.reduction = static_cast<Reduction>(r.u8());
  m.schema.validate();

  const std::uint32_t ns = r.u32();
  m.stats.mean.resize(ns);
  m.stats.std.resize(ns);
  for (auto& v : m.stats.mean) v = r.f64();
  for (auto& v : m.stats.std) v = r.f64();

  m.feature_dropout = r.u8() != 0;

  const std::uint64_t plen = r.u64();
  r.need(plen);
  std::vector<std::uint8_t> pb(r.p + r.pos, r.p + r.pos + plen);
  r.pos += plen;
  m.params = deserialize_params(pb);

  if (m.params.input_width() != m.expected_width())
    throw DataError("model file: parameter width does not match schema");
  return m;
}

void save_model(const std::string& path, const Model& model) {
  write_file_bytes(path, serialize_model(model));
}

Model load_model(const std::string& path) { return deserialize_model(read_file_bytes(path)); }

}  // namespace flowids
