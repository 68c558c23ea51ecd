// include/rmaml/losses.h

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

#ifndef RMAML_LOSSES_H_
#define RMAML_LOSSES_H_

#include <span>
#include <string>

#include "rmaml/common.h"
#include "rmaml/json_util.h"

namespace rmaml {

enum class HeadKind { kSoftmaxLinear, kAam };

std::string HeadKindName(HeadKind kind);
HeadKind ParseHeadKind(const std::string &name);

/// Additive angular margin softmax: the target logit is s*cos(theta_y + m),
/// the others s*cos(theta_k).
struct AamConfig {
  double scale = 32.0;
  double margin = 0.2;

  void Check() const;
};

/// Loss settings, serialized under the `loss` config key as
/// {"kind", "scale", "margin"}.  scale/margin only matter for kind=aam.
struct LossSpec {
  HeadKind kind = HeadKind::kSoftmaxLinear;
  AamConfig aam;
};

void to_json(Json &j, const LossSpec &spec);
void from_json(const Json &j, LossSpec &spec);

struct LossResult {
  double loss = 0.0;
  RowMatrix grad;  // dL/dlogits, same shape as the logits
};

/// Mean softmax cross-entropy over the rows of `logits`.  Uses max
/// subtraction for the log-sum-exp.  Throws DataError on a bad label.
LossResult SoftmaxCe(const RowMatrix &logits, std::span<const int> labels);

/// Row-wise softmax.
RowMatrix Softmax(const RowMatrix &logits);

// Cosine-head primitives.  They are shared by AamLoss and by the network's
// gradient and Hessian-vector code.

/// Row norms below this are treated as zero.
inline constexpr double kMinRowNorm = 1e-12;

struct NormalizedRows {
  RowMatrix unit;  // rows scaled to unit length
  Vector norms;
};

/// Throws NumericError if a row has (near-)zero norm; `what` names the
/// matrix in the message.
NormalizedRows NormalizeRows(const RowMatrix &m, const char *what);

/// Backpropagates dL/d(unit) to dL/d(rows).
RowMatrix NormalizeRowsBackward(const NormalizedRows &n,
                                const RowMatrix &grad_unit);

/// Directional derivative of the unit rows given a tangent of the input.
struct NormalizedRowsTangent {
  RowMatrix unit_dot;
  Vector norms_dot;
};
NormalizedRowsTangent NormalizeRowsTangent(const NormalizedRows &n,
                                           const RowMatrix &rows_dot);

/// Directional derivative of NormalizeRowsBackward(n, grad_unit) when both
/// the input rows and grad_unit move along a tangent.
RowMatrix NormalizeRowsBackwardTangent(const NormalizedRows &n,
                                       const NormalizedRowsTangent &t,
                                       const RowMatrix &grad_unit,
                                       const RowMatrix &grad_unit_dot);

/// Applies the angular margin to target entries of a cosine matrix.  Each
/// entry becomes s*psi(c) with psi(c) = c off-target and
/// psi(c) = c cos m - sqrt(1 - c^2) sin m on target.  sqrt(1 - c^2) is
/// clamped at 0 and its derivative is taken as 0 where it vanishes.
struct MarginLogits {
  RowMatrix logits;
  RowMatrix first;   // d logit / d c, elementwise
  RowMatrix second;  // d^2 logit / d c^2, elementwise
};
MarginLogits ApplyAngularMargin(const RowMatrix &cosines,
                                std::span<const int> labels,
                                const AamConfig &cfg);

struct AamLossResult {
  double loss = 0.0;
  RowMatrix d_embeddings;
  RowMatrix d_weights;
};

/// AAM-softmax loss of `embeddings` (n x h) against class weight rows
/// `weights` (K x h).  Both are normalized internally; zero-norm rows are a
/// NumericError.
AamLossResult AamLoss(const RowMatrix &embeddings, const RowMatrix &weights,
                      std::span<const int> labels, const AamConfig &cfg);

}  // namespace rmaml

#endif  // RMAML_LOSSES_H_
