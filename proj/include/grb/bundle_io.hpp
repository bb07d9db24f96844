#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "grb/graph.hpp"

namespace grb {

/// Reads a dataset bundle directory: meta.json, edges.bin, features.bin and
/// labels.bin. The edge list is canonicalized (symmetrized, deduplicated,
/// self-loops dropped); meta.json "num_edges" must equal the number of stored
/// pairs.
GraphBundle load_bundle(const std::filesystem::path& dir);

/// Writes the bundle with "edge_storage": "undirected" (each edge once, u < v).
void save_bundle(const GraphBundle& g, const std::filesystem::path& dir);

namespace io {

// Little-endian binary helpers shared by the bundle, checkpoint and attack
// formats.
std::vector<std::uint32_t> read_u32_file(const std::filesystem::path& path);
std::vector<float> read_f32_file(const std::filesystem::path& path);
void write_u32_file(const std::filesystem::path& path, std::span<const std::uint32_t> values);
void write_f32_file(const std::filesystem::path& path, std::span<const float> values);

void append_f32(std::vector<char>& out, std::span<const float> values);
std::vector<float> parse_f32(std::span<const char> bytes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace io

}  // namespace grb
