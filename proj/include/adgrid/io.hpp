#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "adgrid/features.hpp"

// File formats.
//
// "VFF1" feature file: magic `VFF1`, u32 LE dimension, u64 LE count, then
// count x dimension float32 LE values, row major. Ids are the row index
// rendered as a decimal string unless a sidecar id file (one id per line)
// is supplied.
//
// JSON-lines feature stream: one object per line, {"id": "...", "vec": [...]}.

namespace adgrid {

enum class FeatureFormat { binary, jsonl };

namespace detail {

inline void write_u32le(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

inline void write_u64le(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t read_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("unexpected end of stream while reading u32");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("unexpected end of stream while reading u64");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline void write_f32le(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32le(out, bits);
}

inline float read_f32le(std::istream& in) {
  const std::uint32_t bits = read_u32le(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline constexpr char kBase64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace detail

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(detail::kBase64Chars[(v >> 18) & 63]);
    out.push_back(detail::kBase64Chars[(v >> 12) & 63]);
    out.push_back(detail::kBase64Chars[(v >> 6) & 63]);
    out.push_back(detail::kBase64Chars[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(detail::kBase64Chars[(v >> 18) & 63]);
    out.push_back(detail::kBase64Chars[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(detail::kBase64Chars[(v >> 18) & 63]);
    out.push_back(detail::kBase64Chars[(v >> 12) & 63]);
    out.push_back(detail::kBase64Chars[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::array<int, 256> lut;
  lut.fill(-1);
  for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(detail::kBase64Chars[i])] = i;
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = lut[static_cast<unsigned char>(c)];
    if (v < 0) throw std::runtime_error("invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

/// float32 array <-> base64, the embedding used inside model JSON documents.
inline std::string floats_to_base64(const std::vector<float>& values) {
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &values[i], 4);
    bytes[4 * i] = static_cast<std::uint8_t>(bits & 0xff);
    bytes[4 * i + 1] = static_cast<std::uint8_t>((bits >> 8) & 0xff);
    bytes[4 * i + 2] = static_cast<std::uint8_t>((bits >> 16) & 0xff);
    bytes[4 * i + 3] = static_cast<std::uint8_t>((bits >> 24) & 0xff);
  }
  return base64_encode(bytes);
}

inline std::vector<float> base64_to_floats(const std::string& text) {
  const std::vector<std::uint8_t> bytes = base64_decode(text);
  if (bytes.size() % 4 != 0) throw std::runtime_error("float32 payload length not a multiple of 4");
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i]) |
                               (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
    std::memcpy(&values[i], &bits, 4);
  }
  return values;
}

/// Parses a feature stream. For the binary format, `ids` (when non-null)
/// supplies one id per row; otherwise row indices are used.
inline FeatureSet ingest_features(std::istream& in, FeatureFormat format,
                                  const std::vector<std::string>* ids = nullptr) {
  FeatureSet set;
  if (format == FeatureFormat::binary) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "VFF1", 4) != 0)
      throw std::runtime_error("malformed header: missing VFF1 magic");
    const std::uint32_t dim = detail::read_u32le(in);
    const std::uint64_t count = detail::read_u64le(in);
    if (dim == 0) throw std::runtime_error("malformed header: zero dimension");
    if (ids && ids->size() != count)
      throw std::runtime_error("sidecar id count does not match record count");
    set.vectors.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) {
      FeatureVector v;
      v.id = ids ? (*ids)[r] : std::to_string(r);
      v.values.resize(dim);
      for (std::uint32_t c = 0; c < dim; ++c) {
        const float x = detail::read_f32le(in);
        if (!std::isfinite(x))
          throw std::runtime_error("non-finite value in record " + std::to_string(r));
        v.values[c] = x;
      }
      set.vectors.push_back(std::move(v));
    }
  } else {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed json-lines record at line " +
                                 std::to_string(line_no) + ": " + e.what());
      }
      if (!obj.contains("id") || !obj.contains("vec") || !obj["vec"].is_array())
        throw std::runtime_error("json-lines record missing id/vec at line " +
                                 std::to_string(line_no));
      FeatureVector v;
      v.id = obj["id"].get<std::string>();
      for (const auto& x : obj["vec"]) {
        const double d = x.get<double>();
        if (!std::isfinite(d))
          throw std::runtime_error("non-finite value at line " + std::to_string(line_no));
        v.values.push_back(static_cast<float>(d));
      }
      if (!set.vectors.empty() && v.dim() != set.dim())
        throw std::runtime_error("dimension mismatch at line " + std::to_string(line_no));
      if (v.values.empty())
        throw std::runtime_error("empty vector at line " + std::to_string(line_no));
      set.vectors.push_back(std::move(v));
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& v : set.vectors)
    if (!seen.insert(v.id).second) throw std::runtime_error("duplicate id: " + v.id);
  return set;
}

inline void write_features(std::ostream& out, const FeatureSet& set) {
  out.write("VFF1", 4);
  detail::write_u32le(out, static_cast<std::uint32_t>(set.dim()));
  detail::write_u64le(out, static_cast<std::uint64_t>(set.size()));
  for (const auto& v : set.vectors) {
    if (v.dim() != set.dim()) throw std::invalid_argument("ragged feature set");
    for (float x : v.values) detail::write_f32le(out, x);
  }
}

inline std::vector<std::string> read_id_lines(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  return ids;
}

inline void write_id_lines(std::ostream& out, const FeatureSet& set) {
  for (const auto& v : set.vectors) out << v.id << '\n';
}

/// Loads features from disk, picking the format from the file contents
/// (VFF1 magic) and pulling in `<path>.ids` or an explicit sidecar if present.
inline FeatureSet load_features(const std::string& path, const std::string& ids_path = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file: " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, "VFF1", 4) == 0;
  in.clear();
  in.seekg(0);

  std::vector<std::string> ids;
  const std::string sidecar = ids_path.empty() ? path + ".ids" : ids_path;
  std::ifstream ids_in(sidecar);
  const bool have_ids = ids_in.good();
  if (!ids_path.empty() && !have_ids)
    throw std::runtime_error("cannot open id file: " + ids_path);
  if (have_ids) ids = read_id_lines(ids_in);

  return ingest_features(in, binary ? FeatureFormat::binary : FeatureFormat::jsonl,
                         binary && have_ids ? &ids : nullptr);
}

inline void save_features(const std::string& path, const FeatureSet& set, bool with_ids = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_features(out, set);
  if (with_ids) {
    std::ofstream ids_out(path + ".ids");
    if (!ids_out) throw std::runtime_error("cannot open for writing: " + path + ".ids");
    write_id_lines(ids_out, set);
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

}  // namespace adgrid
