// include/rmaml/backend.h

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

#ifndef RMAML_BACKEND_H_
#define RMAML_BACKEND_H_

#include <span>
#include <string>
#include <vector>

#include "rmaml/common.h"
#include "rmaml/json_util.h"
#include "rmaml/vecio.h"

namespace rmaml {

/// Centering with optional length normalization to norm sqrt(d).
struct Preproc {
  Vector mean;
  bool length_norm = false;

  bool operator==(const Preproc &other) const {
    return length_norm == other.length_norm && mean == other.mean;
  }
};

Preproc FitPreproc(const RowMatrix &x, bool length_norm);
/// Throws DataError on a dimension mismatch, or on a vector equal to the
/// mean when length normalization is on.
Vector ApplyPreproc(const Preproc &p, const Vector &v);

struct LdaModel {
  Vector mean;
  /// out_dim x D; rows are generalized eigenvectors of (S_b, S_w),
  /// normalized so that v_i^T S_w v_j = delta_ij, in descending eigenvalue
  /// order.
  Matrix projection;
  Vector eigenvalues;

  int OutDim() const { return static_cast<int>(projection.rows()); }
};

/// Within- and between-class scatter, both normalized by the total count.
/// The within-class scatter is floored by 1e-6 * tr(S_w) / D on the
/// diagonal, which is the matrix the LDA solution is orthonormal against.
struct Scatter {
  Vector mean;
  Matrix within;  // floored
  Matrix between;
};
Scatter ComputeScatter(const RowMatrix &x, std::span<const int> labels);

/// Throws ConfigError when out_dim > min(D, K - 1) and DataError for fewer
/// than two classes or a degenerate within-class scatter.
LdaModel FitLda(const RowMatrix &x, std::span<const int> labels, int out_dim);
Vector ApplyLda(const LdaModel &m, const Vector &v);

/// Two-covariance PLDA: speaker means y ~ N(mu, B) and utterances
/// x ~ N(y, W).  Scoring matrices are precomputed on construction.
class PldaModel {
 public:
  PldaModel() = default;
  PldaModel(Vector mu, Matrix between, Matrix within);

  const Vector &Mean() const { return mu_; }
  const Matrix &Between() const { return between_; }
  const Matrix &Within() const { return within_; }
  int Dim() const { return static_cast<int>(mu_.size()); }

  /// log p(e, t | same speaker) - log p(e) p(t), single enrollment vector.
  double LogLikelihoodRatio(const Vector &enroll, const Vector &test) const;

 private:
  Vector mu_;
  Matrix between_, within_;
  Matrix quad_;   // weight of e'^T . e' and t'^T . t' terms
  Matrix cross_;  // weight of e'^T . t'
  double offset_ = 0.0;
};

struct PldaFitResult {
  PldaModel model;
  /// Data log-likelihood of the initial model followed by one entry per EM
  /// iteration.
  std::vector<double> log_likelihoods;
};

/// Exact marginal log-likelihood of the data under the model.
double PldaLogLikelihood(const PldaModel &m, const RowMatrix &x,
                         std::span<const int> labels);

/// Initialization (global mean, within-speaker and speaker-mean covariance)
/// followed by n_iters EM iterations.  Needs at least two speakers with two
/// or more utterances.
PldaFitResult FitPlda(const RowMatrix &x, std::span<const int> labels,
                      int n_iters);

double ScorePlda(const PldaModel &m, const Vector &enroll, const Vector &test);

/// Cosine similarity; throws DataError on a zero vector.
double ScoreCosine(const Vector &a, const Vector &b);

/// Settings of the `backend` config section.
struct BackendConfig {
  int lda_dim = 128;
  int plda_iters = 10;
  bool length_norm = true;

  void Check() const;
};

void to_json(Json &j, const BackendConfig &c);
void from_json(const Json &j, BackendConfig &c);

/// LDA followed by length-normalized PLDA, fitted on one dataset.
struct Backend {
  LdaModel lda;
  Preproc plda_preproc;
  PldaModel plda;
  std::vector<double> plda_log_likelihoods;
};

/// Fits the LDA/PLDA chain.  lda_dim is clamped to K - 1 (and D) with a
/// warning on stderr when the data has too few speakers.
Backend FitBackend(const EmbeddingDataset &ds, const BackendConfig &cfg);

Json LdaToJson(const LdaModel &m);
LdaModel LdaFromJson(const Json &j);
/// The PLDA file carries the preprocessing applied to LDA outputs.
Json PldaToJson(const Preproc &pre, const PldaModel &m);
PldaModel PldaFromJson(const Json &j, Preproc *pre);

}  // namespace rmaml

#endif  // RMAML_BACKEND_H_
