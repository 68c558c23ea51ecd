// src/losses.cc

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

#include "rmaml/losses.h"

#include <cmath>
#include <numbers>

namespace rmaml {

std::string HeadKindName(HeadKind kind) {
  return kind == HeadKind::kAam ? "aam" : "softmax_linear";
}

HeadKind ParseHeadKind(const std::string &name) {
  if (name == "softmax_linear" || name == "softmax") return HeadKind::kSoftmaxLinear;
  if (name == "aam") return HeadKind::kAam;
  throw ConfigError("unknown loss kind '" + name +
                    "' (expected softmax_linear or aam)");
}

void AamConfig::Check() const {
  if (!(scale > 0.0)) throw ConfigError("loss.scale must be > 0");
  if (!(margin >= 0.0 && margin < std::numbers::pi / 2))
    throw ConfigError("loss.margin must be in [0, pi/2)");
}

void to_json(Json &j, const LossSpec &spec) {
  j = Json{{"kind", HeadKindName(spec.kind)},
           {"scale", spec.aam.scale},
           {"margin", spec.aam.margin}};
}

void from_json(const Json &j, LossSpec &spec) {
  CheckKeys(j, {"kind", "scale", "margin"}, "loss");
  std::string kind = HeadKindName(spec.kind);
  ReadKey(j, "kind", &kind, "loss");
  spec.kind = ParseHeadKind(kind);
  ReadKey(j, "scale", &spec.aam.scale, "loss");
  ReadKey(j, "margin", &spec.aam.margin, "loss");
  spec.aam.Check();
}

RowMatrix Softmax(const RowMatrix &logits) {
  RowMatrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

LossResult SoftmaxCe(const RowMatrix &logits, std::span<const int> labels) {
  const Eigen::Index n = logits.rows(), k = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw DataError("softmax_ce: label count does not match logits");
  if (n == 0) throw DataError("softmax_ce: empty batch");
  LossResult out;
  out.grad.resize(n, k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= k)
      throw DataError("softmax_ce: label " + std::to_string(y) +
                      " out of range [0, " + std::to_string(k) + ")");
    const double mx = logits.row(i).maxCoeff();
    auto shifted = (logits.row(i).array() - mx).eval();
    auto e = shifted.exp().eval();
    const double sum = e.sum();
    total += std::log(sum) - shifted(y);
    out.grad.row(i) = e / sum;
    out.grad(i, y) -= 1.0;
  }
  out.loss = total / n;
  out.grad /= static_cast<double>(n);
  return out;
}

NormalizedRows NormalizeRows(const RowMatrix &m, const char *what) {
  NormalizedRows out;
  out.norms = m.rowwise().norm();
  out.unit.resize(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(out.norms[i] >= kMinRowNorm))
      throw NumericError(std::string("zero-norm ") + what + " row " +
                         std::to_string(i));
    out.unit.row(i) = m.row(i) / out.norms[i];
  }
  return out;
}

RowMatrix NormalizeRowsBackward(const NormalizedRows &n,
                                const RowMatrix &grad_unit) {
  Vector proj = (n.unit.array() * grad_unit.array()).rowwise().sum();
  RowMatrix out = grad_unit;
  out.array() -= n.unit.array().colwise() * proj.array();
  out.array().colwise() /= n.norms.array();
  return out;
}

NormalizedRowsTangent NormalizeRowsTangent(const NormalizedRows &n,
                                           const RowMatrix &rows_dot) {
  NormalizedRowsTangent t;
  t.norms_dot = (n.unit.array() * rows_dot.array()).rowwise().sum();
  t.unit_dot = rows_dot;
  t.unit_dot.array() -= n.unit.array().colwise() * t.norms_dot.array();
  t.unit_dot.array().colwise() /= n.norms.array();
  return t;
}

RowMatrix NormalizeRowsBackwardTangent(const NormalizedRows &n,
                                       const NormalizedRowsTangent &t,
                                       const RowMatrix &grad_unit,
                                       const RowMatrix &grad_unit_dot) {
  // out = (g - u (u.g)) / r.  Differentiating:
  //   out' = (g' - u' (u.g) - u (u'.g + u.g')) / r - out r' / r.
  const RowMatrix out = NormalizeRowsBackward(n, grad_unit);
  Vector ug = (n.unit.array() * grad_unit.array()).rowwise().sum();
  Vector ug_dot = (t.unit_dot.array() * grad_unit.array()).rowwise().sum() +
                  (n.unit.array() * grad_unit_dot.array()).rowwise().sum();
  RowMatrix d = grad_unit_dot;
  d.array() -= t.unit_dot.array().colwise() * ug.array();
  d.array() -= n.unit.array().colwise() * ug_dot.array();
  d.array() -= out.array().colwise() * t.norms_dot.array();
  d.array().colwise() /= n.norms.array();
  return d;
}

MarginLogits ApplyAngularMargin(const RowMatrix &cosines,
                                std::span<const int> labels,
                                const AamConfig &cfg) {
  const Eigen::Index n = cosines.rows(), k = cosines.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw DataError("aam: label count does not match batch");
  const double s = cfg.scale;
  const double cos_m = std::cos(cfg.margin), sin_m = std::sin(cfg.margin);
  MarginLogits out;
  out.logits = s * cosines;
  out.first = RowMatrix::Constant(n, k, s);
  out.second = RowMatrix::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= k)
      throw DataError("aam: label " + std::to_string(y) + " out of range [0, " +
                      std::to_string(k) + ")");
    const double c = cosines(i, y);
    const double s2 = 1.0 - c * c;
    double sin_t = 0.0, dsin = 0.0, d2sin = 0.0;
    if (s2 > 0.0) {
      sin_t = std::sqrt(s2);
      dsin = -c / sin_t;
      d2sin = -1.0 / (s2 * sin_t);
    }
    out.logits(i, y) = s * (c * cos_m - sin_t * sin_m);
    out.first(i, y) = s * (cos_m - dsin * sin_m);
    out.second(i, y) = -s * d2sin * sin_m;
  }
  return out;
}

AamLossResult AamLoss(const RowMatrix &embeddings, const RowMatrix &weights,
                      std::span<const int> labels, const AamConfig &cfg) {
  cfg.Check();
  if (embeddings.cols() != weights.cols())
    throw DataError("aam: embedding and weight dimensions differ");
  const NormalizedRows x = NormalizeRows(embeddings, "embedding");
  const NormalizedRows w = NormalizeRows(weights, "class weight");
  const RowMatrix cosines = x.unit * w.unit.transpose();
  const MarginLogits ml = ApplyAngularMargin(cosines, labels, cfg);
  LossResult ce = SoftmaxCe(ml.logits, labels);
  const RowMatrix d_cos = ce.grad.cwiseProduct(ml.first);
  AamLossResult out;
  out.loss = ce.loss;
  out.d_embeddings = NormalizeRowsBackward(x, d_cos * w.unit);
  out.d_weights = NormalizeRowsBackward(w, d_cos.transpose() * x.unit);
  return out;
}

}  // namespace rmaml
