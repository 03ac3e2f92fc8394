// Helpers shared by the line-oriented JSON readers. Private to the library.
#ifndef CRE_SRC_JSON_UTIL_H_
#define CRE_SRC_JSON_UTIL_H_

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "cre/error.h"
#include "json.hpp"

namespace cre::internal {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  return in;
}

inline Json parse_json(std::string_view text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(where + ": invalid JSON: " + e.what());
  }
}

// Calls fn(json, "line N") for every non-blank line.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    fn(parse_json(line, where), where);
  }
}

inline const Json& require(const Json& obj, const char* key,
                           const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return *it;
}

inline std::string require_string(const Json& obj, const char* key,
                                  const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string()) {
    throw ParseError(where + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

inline long long require_int(const Json& obj, const char* key,
                             const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number_integer()) {
    throw ParseError(where + ": field '" + key + "' must be an integer");
  }
  return v.get<long long>();
}

inline std::string optional_string(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  return it->is_string() ? it->get<std::string>() : it->dump();
}

inline std::vector<std::string> require_tokens(const Json& obj, const char* key,
                                               const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_array()) {
    throw ParseError(where + ": field '" + key + "' must be an array");
  }
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const Json& t : v) {
    if (!t.is_string()) {
      throw ParseError(where + ": field '" + key + "' must hold strings");
    }
    out.push_back(t.get<std::string>());
  }
  return out;
}

// Compact UTF-8 dump; invalid UTF-8 is replaced rather than thrown on.
inline std::string dump_line(const OrderedJson& j) {
  return j.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
}
inline std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

}  // namespace cre::internal

#endif  // CRE_SRC_JSON_UTIL_H_
