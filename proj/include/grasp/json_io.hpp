#pragma once

// JSON (de)serialization for architecture specs plus atomic file helpers.
//
// Spec JSON schema:
//   {
//     "n": 4,
//     "adjacency": ["0101", "0010", "0001", "0000"],   // one bitstring per row
//     "layer_types": ["input", "stem-conv3x3", "conv3x3-same", "output"]
//   }

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grasp/errors.hpp"
#include "grasp/search_space.hpp"

namespace grasp {

using Json = nlohmann::json;

inline Json spec_to_json(const ArchSpec& spec) {
  Json j;
  j["n"] = spec.n;
  std::vector<std::string> rows;
  rows.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    std::string row(spec.n, '0');
    for (int k = 0; k < spec.n; ++k)
      if (spec.adjacency[i][k]) row[k] = '1';
    rows.push_back(std::move(row));
  }
  j["adjacency"] = rows;
  std::vector<std::string> types;
  types.reserve(spec.n);
  for (LayerType t : spec.layer_types) types.emplace_back(to_string(t));
  j["layer_types"] = types;
  return j;
}

inline ArchSpec spec_from_json(const Json& j) {
  ArchSpec spec;
  try {
    spec.n = j.at("n").get<int>();
    auto rows = j.at("adjacency").get<std::vector<std::string>>();
    auto types = j.at("layer_types").get<std::vector<std::string>>();
    if (static_cast<int>(rows.size()) != spec.n)
      throw InvalidArgumentError("adjacency row count disagrees with n");
    spec.adjacency.assign(spec.n, std::vector<std::uint8_t>(spec.n, 0));
    for (int i = 0; i < spec.n; ++i) {
      if (static_cast<int>(rows[i].size()) != spec.n)
        throw InvalidArgumentError("adjacency row length disagrees with n");
      for (int k = 0; k < spec.n; ++k) {
        char c = rows[i][k];
        if (c != '0' && c != '1')
          throw InvalidArgumentError("adjacency rows must be bitstrings");
        spec.adjacency[i][k] = c == '1' ? 1 : 0;
      }
    }
    for (const std::string& t : types) spec.layer_types.push_back(layer_type_from_string(t));
  } catch (const Json::exception& e) {
    throw InvalidArgumentError(std::string("malformed spec JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

// Writes via a temporary sibling and renames, so readers never observe a
// partially written file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline Json read_json_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw InvalidArgumentError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const Json& j, int indent = 2) {
  atomic_write_file(path, j.dump(indent) + "\n");
}

}  // namespace grasp
