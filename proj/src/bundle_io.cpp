#include "grb/bundle_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "grb/error.hpp"

namespace grb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace io {

namespace {

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

std::vector<char> read_bytes(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_bytes(const fs::path& path, const char* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(data, static_cast<std::streamsize>(size));
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

template <typename T>
std::vector<T> decode(std::span<const char> bytes, const std::string& what) {
  if (bytes.size() % sizeof(T) != 0) {
    throw Error(ErrorCode::ShapeMismatch, what + ": size " + std::to_string(bytes.size()) +
                                              " is not a multiple of " + std::to_string(sizeof(T)));
  }
  std::vector<T> out(bytes.size() / sizeof(T));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  for (T& v : out) v = to_little(v);
  return out;
}

template <typename T>
std::vector<char> encode(std::span<const T> values) {
  std::vector<char> out(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    T v = to_little(values[i]);
    std::memcpy(out.data() + i * sizeof(T), &v, sizeof(T));
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> read_u32_file(const fs::path& path) {
  auto bytes = read_bytes(path);
  return decode<std::uint32_t>(bytes, path.filename().string());
}

std::vector<float> read_f32_file(const fs::path& path) {
  auto bytes = read_bytes(path);
  return decode<float>(bytes, path.filename().string());
}

void write_u32_file(const fs::path& path, std::span<const std::uint32_t> values) {
  auto bytes = encode(values);
  write_bytes(path, bytes.data(), bytes.size());
}

void write_f32_file(const fs::path& path, std::span<const float> values) {
  auto bytes = encode(values);
  write_bytes(path, bytes.data(), bytes.size());
}

void append_f32(std::vector<char>& out, std::span<const float> values) {
  auto bytes = encode(values);
  out.insert(out.end(), bytes.begin(), bytes.end());
}

std::vector<float> parse_f32(std::span<const char> bytes) { return decode<float>(bytes, "f32 blob"); }

std::string read_text_file(const fs::path& path) {
  auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const fs::path& path, const std::string& text) {
  write_bytes(path, text.data(), text.size());
}

}  // namespace io

namespace {

std::size_t meta_count(const json& meta, const char* key) {
  if (!meta.contains(key) || !meta[key].is_number_unsigned()) {
    throw Error(ErrorCode::FormatError, std::string("meta.json: missing or invalid \"") + key + "\"");
  }
  return meta[key].get<std::size_t>();
}

}  // namespace

GraphBundle load_bundle(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  json meta;
  try {
    meta = json::parse(io::read_text_file(meta_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "meta.json: " + std::string(e.what()));
  }
  const std::size_t n = meta_count(meta, "num_nodes");
  const std::size_t num_edges = meta_count(meta, "num_edges");
  const std::size_t d = meta_count(meta, "num_features");
  const std::size_t num_classes = meta_count(meta, "num_classes");
  const std::string name = meta.value("name", dir.filename().string());
  const std::string storage = meta.value("edge_storage", "undirected");
  if (storage != "undirected" && storage != "directed") {
    throw Error(ErrorCode::FormatError, "meta.json: edge_storage must be undirected|directed");
  }

  const auto raw_edges = io::read_u32_file(dir / "edges.bin");
  const auto raw_features = io::read_f32_file(dir / "features.bin");
  const auto labels = io::read_u32_file(dir / "labels.bin");

  if (raw_edges.size() != 2 * num_edges) {
    throw Error(ErrorCode::ShapeMismatch, "edges.bin holds " + std::to_string(raw_edges.size() / 2) +
                                              " pairs, meta.json says " + std::to_string(num_edges));
  }
  if (raw_features.size() != n * d) {
    throw Error(ErrorCode::ShapeMismatch, "features.bin holds " + std::to_string(raw_features.size()) +
                                              " values, expected " + std::to_string(n) + "x" + std::to_string(d));
  }
  if (labels.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "labels.bin holds " + std::to_string(labels.size()) +
                                              " labels, expected " + std::to_string(n));
  }

  std::vector<Edge> edges(num_edges);
  for (std::size_t i = 0; i < num_edges; ++i) {
    edges[i] = {raw_edges[2 * i], raw_edges[2 * i + 1]};
    if (edges[i].u >= n || edges[i].v >= n) {
      throw Error(ErrorCode::ShapeMismatch, "edge " + std::to_string(i) + " references a node >= num_nodes");
    }
  }
  FeatureMatrix features = Eigen::Map<const FeatureMatrix>(raw_features.data(), static_cast<Eigen::Index>(n),
                                                           static_cast<Eigen::Index>(d));
  return GraphBundle(name, n, edges, std::move(features), labels, static_cast<std::uint32_t>(num_classes));
}

void save_bundle(const GraphBundle& g, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  const auto edges = g.edge_list();
  std::vector<std::uint32_t> flat;
  flat.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    flat.push_back(e.u);
    flat.push_back(e.v);
  }
  json meta = {{"name", g.name()},
               {"num_nodes", g.num_nodes()},
               {"num_edges", edges.size()},
               {"num_features", g.num_features()},
               {"num_classes", g.num_classes()},
               {"edge_storage", "undirected"}};
  io::write_text_file(dir / "meta.json", meta.dump(2) + "\n");
  io::write_u32_file(dir / "edges.bin", flat);
  const FeatureMatrix& f = g.features();
  io::write_f32_file(dir / "features.bin", std::span<const float>(f.data(), static_cast<std::size_t>(f.size())));
  io::write_u32_file(dir / "labels.bin", g.labels());
}

}  // namespace grb
