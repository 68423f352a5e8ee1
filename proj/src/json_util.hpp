// Copyright 2026 The repjudge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Private helpers shared by the translation units that touch JSON.

#ifndef REPJUDGE_SRC_JSON_UTIL_HPP_
#define REPJUDGE_SRC_JSON_UTIL_HPP_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "repjudge/error.hpp"

namespace repjudge::detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
}

template <typename J = Json>
J parse_json(const std::string& text, const std::string& what = "document") {
  try {
    return J::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports the 1-based position of the offending byte.
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError("malformed JSON in " + what, offset);
  }
}

template <typename T, typename J>
T get_field(const J& object, const char* key, const std::string& context) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw Error(ErrorKind::kSchema, context + ": missing field '" + key + "'");
  }
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kSchema, context + ": field '" + key + "' has the wrong type");
  }
}

template <typename T, typename J>
T get_field_or(const J& object, const char* key, T fallback,
               const std::string& context) {
  if (!object.contains(key)) return fallback;
  return get_field<T>(object, key, context);
}

}  // namespace repjudge::detail

#endif  // REPJUDGE_SRC_JSON_UTIL_HPP_
