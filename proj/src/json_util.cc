// src/json_util.cc

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

#include "rmaml/json_util.h"

#include <fstream>
#include <sstream>

namespace rmaml {

void CheckKeys(const Json &j, std::initializer_list<const char *> allowed,
               const std::string &section) {
  if (!j.is_object())
    throw ConfigError("'" + section + "' must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char *key : allowed)
      if (it.key() == key) known = true;
    if (!known)
      throw ConfigError("unknown key '" + it.key() + "' in '" + section +
                        "'");
  }
}

Json VectorToJson(const Vector &v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector VectorFromJson(const Json &j, const std::string &what) {
  if (!j.is_array()) throw DataError(what + ": expected an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError(what + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

Json MatrixToJson(const Matrix &m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    rows.push_back(VectorToJson(m.row(r).transpose()));
  return rows;
}

Matrix MatrixFromJson(const Json &j, const std::string &what) {
  if (!j.is_array()) throw DataError(what + ": expected an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j[0].size();
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    Vector row = VectorFromJson(j[r], what);
    if (static_cast<std::size_t>(row.size()) != cols)
      throw DataError(what + ": ragged matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

Json ReadJsonFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open '" + path + "' for reading");
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::parse_error &e) {
    throw DataError(path + ": " + e.what());
  }
}

void WriteJsonFile(const Json &j, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw DataError("error writing '" + path + "'");
}

}  // namespace rmaml
