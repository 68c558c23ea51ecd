// include/rmaml/common.h

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

#ifndef RMAML_COMMON_H_
#define RMAML_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rmaml {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major storage for batches of vectors (one sample per row).
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base class of all errors raised by the toolkit.  The subclasses map onto
/// the command-line exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int ExitCode() const { return 1; }
};

/// Bad or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
  int ExitCode() const override { return 2; }
};

/// Malformed, missing or inconsistent input data (exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
  int ExitCode() const override { return 3; }
};

/// Numerical divergence: non-finite losses, singular covariances (exit 4).
class NumericError : public Error {
 public:
  using Error::Error;
  int ExitCode() const override { return 4; }
};

using Rng = std::mt19937_64;

/// Uniform integer in [0, n).  Unlike std::uniform_int_distribution the
/// mapping from engine output is fixed, so sampling is reproducible across
/// standard library implementations.
inline std::size_t UniformIndex(Rng &rng, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

/// Independent, reproducible random stream identified by (seed, tag, index).
inline Rng MakeStream(std::uint64_t seed, std::uint64_t tag,
                      std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

/// Fills `v` with independent N(0, 1) draws.
template <typename Derived>
void FillGaussian(Rng &rng, Eigen::DenseBase<Derived> &v) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = normal(rng);
}

/// Formats a double with the shortest representation that parses back to
/// the identical value.
std::string FormatDouble(double value);

/// Parses a complete decimal floating-point token; throws DataError with
/// `context` on failure.
double ParseDouble(std::string_view token, std::string_view context);

std::vector<std::string> SplitString(std::string_view text, char delim);

}  // namespace rmaml

#endif  // RMAML_COMMON_H_
