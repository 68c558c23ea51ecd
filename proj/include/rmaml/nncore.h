// include/rmaml/nncore.h

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

#ifndef RMAML_NNCORE_H_
#define RMAML_NNCORE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "rmaml/common.h"
#include "rmaml/json_util.h"
#include "rmaml/losses.h"

namespace rmaml {

enum class Activation { kRelu, kTanh, kIdentity };

std::string ActivationName(Activation a);
Activation ParseActivation(const std::string &name);

/// Topology of the projection network: fully connected layers
/// layer_dims[0] -> layer_dims[1] -> ... -> layer_dims[L], followed by a
/// classifier head over n_classes speakers.  The output of layer L is the
/// embedding; the head is only used for training.
struct NetArch {
  std::vector<int> layer_dims;
  Activation hidden_activation = Activation::kRelu;
  Activation embedding_activation = Activation::kIdentity;
  HeadKind head = HeadKind::kSoftmaxLinear;
  int n_classes = 2;

  int NumLayers() const { return static_cast<int>(layer_dims.size()) - 1; }
  int InputDim() const { return layer_dims.front(); }
  int EmbeddingDim() const { return layer_dims.back(); }
  Activation LayerActivation(int layer) const {
    return layer + 1 == NumLayers() ? embedding_activation : hidden_activation;
  }
  /// Throws ConfigError.
  void Check() const;
  bool operator==(const NetArch &other) const = default;
};

/// A point in parameter space of a NetArch: either the network parameters
/// theta or a gradient / direction with the same layout.  All parameters
/// live in one flat vector, ordered W_1, b_1, ..., W_L, b_L, head weights,
/// head bias (softmax_linear only); weight matrices are row-major with shape
/// (layer_dims[l] x layer_dims[l-1]).
class ParamSet {
 public:
  ParamSet() = default;
  /// All-zero parameters.
  explicit ParamSet(NetArch arch);

  const NetArch &Arch() const { return arch_; }
  Vector &Values() { return values_; }
  const Vector &Values() const { return values_; }
  Eigen::Index Size() const { return values_.size(); }

  using MatMap = Eigen::Map<RowMatrix>;
  using ConstMatMap = Eigen::Map<const RowMatrix>;
  using VecMap = Eigen::Map<Vector>;
  using ConstVecMap = Eigen::Map<const Vector>;

  /// `layer` is 0-based: Weight(0) maps layer_dims[0] to layer_dims[1].
  MatMap Weight(int layer);
  ConstMatMap Weight(int layer) const;
  VecMap Bias(int layer);
  ConstVecMap Bias(int layer) const;
  /// n_classes x embedding_dim.
  MatMap HeadWeight();
  ConstMatMap HeadWeight() const;
  /// Length n_classes for softmax_linear, empty for aam.
  VecMap HeadBias();
  ConstVecMap HeadBias() const;

  bool SameShape(const ParamSet &other) const { return arch_ == other.arch_; }
  bool operator==(const ParamSet &other) const {
    return arch_ == other.arch_ && values_ == other.values_;
  }

 private:
  NetArch arch_;
  Vector values_;
  std::vector<Eigen::Index> offsets_;  // start of W_l, b_l, ..., head W, head b
};

/// The network parameters theta.
using ProjectionNet = ParamSet;
/// A gradient or direction with the network's layout.
using ParamGrads = ParamSet;

struct Batch {
  RowMatrix vectors;        // n x D
  std::vector<int> labels;  // n class indices
};

/// Glorot-uniform weights, zero biases; deterministic in `seed`.
ProjectionNet InitNet(const NetArch &arch, std::uint64_t seed);

/// Everything the backward and Hessian-vector passes need.
struct ForwardTrace {
  RowMatrix input;
  std::vector<RowMatrix> pre;   // pre-activations, one per layer
  std::vector<RowMatrix> post;  // activations, one per layer
  /// softmax_linear: the logits.  aam: the cosine matrix between unit
  /// embeddings and unit class weights (margin and scale are applied by the
  /// loss).
  RowMatrix logits;
  NormalizedRows emb_unit;     // aam only
  NormalizedRows weight_unit;  // aam only

  const RowMatrix &Embeddings() const { return post.back(); }
};

ForwardTrace Forward(const ProjectionNet &net, const RowMatrix &batch);

/// Activation of the last FC layer (the projected vector).  Never touches
/// the classifier head.
Vector Embed(const ProjectionNet &net, const Vector &vector);
RowMatrix EmbedBatch(const ProjectionNet &net, const RowMatrix &batch);

/// Loss on the trace's head output and its gradient w.r.t. trace.logits.
LossResult HeadLoss(const ProjectionNet &net, const ForwardTrace &trace,
                    std::span<const int> labels, const LossSpec &spec);

/// Reverse-mode gradient given dL/dlogits (for an aam head, dL/dcosines).
/// ReLU uses subgradient 0 at a pre-activation of exactly 0.
ParamGrads Backward(const ProjectionNet &net, const ForwardTrace &trace,
                    const RowMatrix &loss_grad_on_logits);

struct LossAndGrad {
  double loss = 0.0;
  ParamGrads grad;
};

LossAndGrad ComputeLossAndGrad(const ProjectionNet &net, const Batch &batch,
                               const LossSpec &spec);

/// Exact Hessian-vector product H(theta) v of the batch loss, computed by
/// forward-mode differentiation (along v) of the reverse-mode gradient pass.
ParamGrads Hvp(const ProjectionNet &net, const Batch &batch,
               const LossSpec &spec, const ParamGrads &v);

/// theta + scale * g, leaving the inputs untouched.
ParamSet AxpyParams(const ParamSet &theta, const ParamGrads &g, double scale);

/// Checkpoint document: layer_dims, activations, head kind, n_classes and
/// the flattened parameter arrays in layer order.
Json NetToJson(const ProjectionNet &net);
ProjectionNet NetFromJson(const Json &j);
void SaveNet(const ProjectionNet &net, const std::string &path);
ProjectionNet LoadNet(const std::string &path);

}  // namespace rmaml

#endif  // RMAML_NNCORE_H_
