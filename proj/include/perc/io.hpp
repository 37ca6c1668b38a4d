#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "perc/geometry.hpp"
#include "perc/lattice.hpp"

// Config file format and geometry serialization. The bit string follows the
// edge index layout (horizontal edges row-major, then vertical), most
// significant bit of each byte first, zero-padded to a whole byte.

namespace perc {

inline std::string bits_to_hex(const BondConfig& cfg) {
  const std::size_t m = cfg.box().edge_count();
  const std::size_t bytes = (m + 7) / 8;
  std::string hex;
  hex.reserve(2 * bytes);
  static const char* digits = "0123456789abcdef";
  for (std::size_t byte = 0; byte < bytes; ++byte) {
    unsigned v = 0;
    for (std::size_t bit = 0; bit < 8; ++bit) {
      std::size_t idx = byte * 8 + bit;
      if (idx < m && cfg.open(idx)) v |= 1u << (7 - bit);
    }
    hex.push_back(digits[v >> 4]);
    hex.push_back(digits[v & 15]);
  }
  return hex;
}

inline nlohmann::json config_to_json(const BondConfig& cfg) {
  return nlohmann::json{{"n", cfg.radius()},
                        {"p", cfg.p()},
                        {"seed", cfg.seed()},
                        {"stream", cfg.stream()},
                        {"bits", bits_to_hex(cfg)}};
}

inline BondConfig config_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const double p = j.at("p").get<double>();
  const uint64_t seed = j.at("seed").get<uint64_t>();
  const uint64_t stream = j.at("stream").get<uint64_t>();
  const std::string hex = j.at("bits").get<std::string>();
  Box box(n);
  const std::size_t m = box.edge_count();
  if (hex.size() != 2 * ((m + 7) / 8))
    throw std::invalid_argument("config_from_json: bits length mismatch");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw std::invalid_argument("config_from_json: bad hex digit");
  };
  std::vector<uint64_t> words((m + 63) / 64, 0);
  for (std::size_t idx = 0; idx < m; ++idx) {
    unsigned byte = (nibble(hex[2 * (idx / 8)]) << 4) | nibble(hex[2 * (idx / 8) + 1]);
    if (byte >> (7 - idx % 8) & 1) words[idx >> 6] |= uint64_t{1} << (idx & 63);
  }
  return BondConfig::from_words(box, std::move(words), p, seed, stream);
}

inline nlohmann::json path_to_json(const LatticePath& p) {
  nlohmann::json verts = nlohmann::json::array();
  for (const Vertex& v : p.vertices) verts.push_back({v.x, v.y});
  return nlohmann::json{
      {"lattice", p.lattice == LatticeKind::primal ? "primal" : "dual"},
      {"vertices", verts}};
}

// Fixed float format for CSV output: 10 significant digits, locale-free.
inline std::string csv_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace perc
