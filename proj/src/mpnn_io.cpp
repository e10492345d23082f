#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "d2d/errors.hpp"
#include "d2d/mpnn.hpp"

namespace d2d {

using nlohmann::json;

namespace {

constexpr std::string_view kCheckpointFormat = "d2d-aoi-mpnn";

std::size_t get_width(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
    throw ConfigError(std::string("checkpoint architecture is missing '") + key + "'");
  }
  return j.at(key).get<std::size_t>();
}

}  // namespace

void write_model(std::ostream& out, const MpnnModel& model) {
  const MpnnParams& p = model.params;
  const MpnnArchitecture& a = p.architecture();
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["architecture"] = {{"embedding", a.embedding},
                         {"message_hidden", a.message_hidden},
                         {"message_out", a.message_out},
                         {"update_hidden", a.update_hidden},
                         {"readout_hidden", a.readout_hidden},
                         {"propagation_layers", a.propagation_layers},
                         {"node_features", MpnnArchitecture::node_features},
                         {"edge_features", MpnnArchitecture::edge_features},
                         {"aggregation", "max"}};
  doc["normalizer"] = {{"node_mean_db", model.normalizer.node_mean_db},
                       {"node_std_db", model.normalizer.node_std_db},
                       {"edge_mean_db", model.normalizer.edge_mean_db},
                       {"edge_std_db", model.normalizer.edge_std_db}};
  json layers = json::array();
  for (std::size_t l = 0; l < kMpnnLayerCount; ++l) {
    const auto id = static_cast<MpnnLayer>(l);
    const auto w = p.weights(id);
    const auto b = p.bias(id);
    layers.push_back({{"name", layer_name(id)},
                      {"in", p.shape(id).in},
                      {"out", p.shape(id).out},
                      {"weights", std::vector<double>(w.begin(), w.end())},
                      {"bias", std::vector<double>(b.begin(), b.end())}});
  }
  doc["layers"] = std::move(layers);
  out << doc.dump(1) << '\n';
}

MpnnModel read_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != kCheckpointFormat) throw ConfigError("not an MPNN checkpoint");
  if (doc.value("version", -1) != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version " + doc.value("version", json()).dump());
  }
  const json& ja = doc.at("architecture");
  MpnnArchitecture arch;
  arch.embedding = get_width(ja, "embedding");
  arch.message_hidden = get_width(ja, "message_hidden");
  arch.message_out = get_width(ja, "message_out");
  arch.update_hidden = get_width(ja, "update_hidden");
  arch.readout_hidden = get_width(ja, "readout_hidden");
  arch.propagation_layers = get_width(ja, "propagation_layers");
  if (get_width(ja, "node_features") != MpnnArchitecture::node_features ||
      get_width(ja, "edge_features") != MpnnArchitecture::edge_features) {
    throw ConfigError("checkpoint feature widths do not match this build");
  }
  if (ja.value("aggregation", "") != "max") throw ConfigError("checkpoint aggregation must be max");

  MpnnModel model{MpnnParams(arch), Normalizer{}};
  const json& jn = doc.at("normalizer");
  model.normalizer = {jn.at("node_mean_db").get<double>(), jn.at("node_std_db").get<double>(),
                      jn.at("edge_mean_db").get<double>(), jn.at("edge_std_db").get<double>()};
  if (!(model.normalizer.node_std_db > 0.0) || !(model.normalizer.edge_std_db > 0.0)) {
    throw ConfigError("checkpoint normalizer has a non-positive std");
  }
  const json& layers = doc.at("layers");
  if (!layers.is_array() || layers.size() != kMpnnLayerCount) {
    throw ConfigError("checkpoint must hold exactly 6 layers");
  }
  for (std::size_t l = 0; l < kMpnnLayerCount; ++l) {
    const auto id = static_cast<MpnnLayer>(l);
    const json& jl = layers[l];
    const DenseShape& shape = model.params.shape(id);
    if (jl.value("name", "") != layer_name(id)) {
      throw ConfigError("checkpoint layer " + std::to_string(l) + " should be " +
                        std::string(layer_name(id)));
    }
    const auto in = jl.at("in").get<std::size_t>();
    const auto out = jl.at("out").get<std::size_t>();
    const auto w = jl.at("weights").get<std::vector<double>>();
    const auto b = jl.at("bias").get<std::vector<double>>();
    if (in != shape.in || out != shape.out || w.size() != in * out || b.size() != out) {
      throw ConfigError("layer " + std::string(layer_name(id)) + " declares " +
                        std::to_string(in) + "x" + std::to_string(out) + " but the architecture needs " +
                        std::to_string(shape.in) + "x" + std::to_string(shape.out));
    }
    std::copy(w.begin(), w.end(), model.params.weights(id).begin());
    std::copy(b.begin(), b.end(), model.params.bias(id).begin());
  }
  return model;
}

void save_model(const std::filesystem::path& path, const MpnnModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open checkpoint for writing", path.string());
  write_model(out, model);
  if (!out) throw IoError("failed writing checkpoint", path.string());
}

MpnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint", path.string());
  return read_model(in);
}

namespace {

constexpr char kDatasetMagic[8] = {'D', '2', 'D', 'G', 'R', 'A', 'P', 'H'};

template <class T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t b = 0; b < sizeof(U); ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  out.write(bytes, sizeof(U));
}

template <class T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw std::runtime_error("dataset file is truncated");
  }
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) bits |= static_cast<U>(bytes[b]) << (8 * b);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_dataset(std::ostream& out, std::span<const GraphSample> samples) {
  out.write(kDatasetMagic, sizeof kDatasetMagic);
  put_le<std::uint32_t>(out, kDatasetVersion);
  put_le<std::uint64_t>(out, samples.size());
  for (const GraphSample& s : samples) {
    if (s.normalized) throw std::invalid_argument("datasets store raw (unnormalized) samples");
    const std::size_t m = s.size();
    const DriftConstants& c = *s.raw.constants;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m));
    for (double v : s.z.values()) put_le<double>(out, v);
    for (double v : s.a.values()) put_le<double>(out, v);
    out.write(reinterpret_cast<const char*>(s.edge.data()), static_cast<std::streamsize>(m * m));
    for (double v : s.raw.weights) put_le<double>(out, v);
    for (double v : c.rho) put_le<double>(out, v);
    for (double v : c.d.values()) put_le<double>(out, v);
    put_le<double>(out, s.raw.offset);
  }
}

std::vector<GraphSample> read_dataset(std::istream& in) {
  char magic[sizeof kDatasetMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kDatasetMagic, sizeof magic) != 0) {
    throw std::runtime_error("not a graph dataset file");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kDatasetVersion) {
    throw ConfigError("unsupported dataset version " + std::to_string(version));
  }
  const auto count = get_le<std::uint64_t>(in);
  std::vector<GraphSample> samples;
  samples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::size_t m = get_le<std::uint32_t>(in);
    GraphSample s;
    s.z = Matrix(m, MpnnArchitecture::node_features);
    s.a = Matrix(m, m);
    for (double& v : s.z.values()) v = get_le<double>(in);
    for (double& v : s.a.values()) v = get_le<double>(in);
    s.edge.resize(m * m);
    if (!in.read(reinterpret_cast<char*>(s.edge.data()), static_cast<std::streamsize>(m * m))) {
      throw std::runtime_error("dataset file is truncated");
    }
    s.raw.weights.resize(m);
    for (double& v : s.raw.weights) v = get_le<double>(in);
    std::vector<double> rho(m);
    for (double& v : rho) v = get_le<double>(in);
    Matrix d(m, m);
    for (double& v : d.values()) v = get_le<double>(in);
    s.raw.offset = get_le<double>(in);
    s.raw.constants = std::make_shared<const DriftConstants>(drift_constants_from(std::move(rho), std::move(d)));
    s.in_neighbors.assign(m, {});
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (s.edge[j * m + i]) s.in_neighbors[i].push_back(static_cast<std::uint32_t>(j));
      }
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void save_dataset(const std::filesystem::path& path, std::span<const GraphSample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open dataset for writing", path.string());
  write_dataset(out, samples);
  if (!out) throw IoError("failed writing dataset", path.string());
}

std::vector<GraphSample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset", path.string());
  try {
    return read_dataset(in);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw IoError(e.what(), path.string());
  }
}

}  // namespace d2d
