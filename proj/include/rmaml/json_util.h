// include/rmaml/json_util.h

// Copyright 2026  The rmaml Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef RMAML_JSON_UTIL_H_
#define RMAML_JSON_UTIL_H_

#include <initializer_list>
#include <string>

#include "json.hpp"

#include "rmaml/common.h"

namespace rmaml {

using Json = nlohmann::json;

/// Throws ConfigError unless `j` is an object whose keys all appear in
/// `allowed`.
void CheckKeys(const Json &j, std::initializer_list<const char *> allowed,
               const std::string &section);

/// Assigns j[key] to *out when present; type errors become ConfigError.
template <typename T>
void ReadKey(const Json &j, const char *key, T *out,
             const std::string &section) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    *out = it->template get<T>();
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

Json VectorToJson(const Vector &v);
Vector VectorFromJson(const Json &j, const std::string &what);
/// Matrices are stored as arrays of rows.
Json MatrixToJson(const Matrix &m);
Matrix MatrixFromJson(const Json &j, const std::string &what);

Json ReadJsonFile(const std::string &path);
/// Writes with a fixed indent and trailing newline, so equal documents give
/// equal bytes.
void WriteJsonFile(const Json &j, const std::string &path);

}  // namespace rmaml

#endif  // RMAML_JSON_UTIL_H_
