// src/nncore.cc

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

#include "rmaml/nncore.h"

#include <cmath>

namespace rmaml {

std::string ActivationName(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Activation ParseActivation(const std::string &name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + name +
                    "' (expected relu, tanh or identity)");
}

void NetArch::Check() const {
  if (layer_dims.size() < 2)
    throw ConfigError("layer_dims needs an input and at least one layer");
  for (int d : layer_dims)
    if (d < 1) throw ConfigError("layer_dims entries must be >= 1");
  if (n_classes < 2) throw ConfigError("n_classes must be >= 2");
}

ParamSet::ParamSet(NetArch arch) : arch_(std::move(arch)) {
  arch_.Check();
  Eigen::Index pos = 0;
  for (int l = 0; l < arch_.NumLayers(); ++l) {
    offsets_.push_back(pos);
    pos += static_cast<Eigen::Index>(arch_.layer_dims[l + 1]) *
           arch_.layer_dims[l];
    offsets_.push_back(pos);
    pos += arch_.layer_dims[l + 1];
  }
  offsets_.push_back(pos);
  pos += static_cast<Eigen::Index>(arch_.n_classes) * arch_.EmbeddingDim();
  offsets_.push_back(pos);
  if (arch_.head == HeadKind::kSoftmaxLinear) pos += arch_.n_classes;
  offsets_.push_back(pos);
  values_ = Vector::Zero(pos);
}

ParamSet::MatMap ParamSet::Weight(int layer) {
  return MatMap(values_.data() + offsets_[2 * layer],
                arch_.layer_dims[layer + 1], arch_.layer_dims[layer]);
}

ParamSet::ConstMatMap ParamSet::Weight(int layer) const {
  return ConstMatMap(values_.data() + offsets_[2 * layer],
                     arch_.layer_dims[layer + 1], arch_.layer_dims[layer]);
}

ParamSet::VecMap ParamSet::Bias(int layer) {
  return VecMap(values_.data() + offsets_[2 * layer + 1],
                arch_.layer_dims[layer + 1]);
}

ParamSet::ConstVecMap ParamSet::Bias(int layer) const {
  return ConstVecMap(values_.data() + offsets_[2 * layer + 1],
                     arch_.layer_dims[layer + 1]);
}

ParamSet::MatMap ParamSet::HeadWeight() {
  const std::size_t i = 2 * arch_.NumLayers();
  return MatMap(values_.data() + offsets_[i], arch_.n_classes,
                arch_.EmbeddingDim());
}

ParamSet::ConstMatMap ParamSet::HeadWeight() const {
  const std::size_t i = 2 * arch_.NumLayers();
  return ConstMatMap(values_.data() + offsets_[i], arch_.n_classes,
                     arch_.EmbeddingDim());
}

ParamSet::VecMap ParamSet::HeadBias() {
  const std::size_t i = 2 * arch_.NumLayers() + 1;
  return VecMap(values_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]);
}

ParamSet::ConstVecMap ParamSet::HeadBias() const {
  const std::size_t i = 2 * arch_.NumLayers() + 1;
  return ConstVecMap(values_.data() + offsets_[i],
                     offsets_[i + 1] - offsets_[i]);
}

ProjectionNet InitNet(const NetArch &arch, std::uint64_t seed) {
  ProjectionNet net(arch);
  auto glorot = [](Rng &rng, ParamSet::MatMap w) {
    const double limit = std::sqrt(6.0 / (w.rows() + w.cols()));
    std::uniform_real_distribution<double> uni(-limit, limit);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = uni(rng);
  };
  for (int l = 0; l < arch.NumLayers(); ++l) {
    Rng rng = MakeStream(seed, 0x6e6e, l);
    glorot(rng, net.Weight(l));
  }
  Rng rng = MakeStream(seed, 0x6e6e, arch.NumLayers());
  glorot(rng, net.HeadWeight());
  return net;
}

namespace {

void ApplyActivation(Activation act, const RowMatrix &z, RowMatrix *a) {
  switch (act) {
    case Activation::kRelu: *a = z.cwiseMax(0.0); break;
    case Activation::kTanh: *a = z.array().tanh(); break;
    case Activation::kIdentity: *a = z; break;
  }
}

// First derivative of the activation, elementwise, given z and a = act(z).
RowMatrix ActivationDeriv(Activation act, const RowMatrix &z,
                          const RowMatrix &a) {
  switch (act) {
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::kIdentity:
      break;
  }
  return RowMatrix::Ones(z.rows(), z.cols());
}

// Second derivative; zero for relu (almost everywhere) and identity.
RowMatrix ActivationDeriv2(Activation act, const RowMatrix &z,
                           const RowMatrix &a) {
  if (act == Activation::kTanh)
    return (-2.0 * a.array() * (1.0 - a.array().square())).matrix();
  return RowMatrix::Zero(z.rows(), z.cols());
}

void CheckBatch(const ProjectionNet &net, const RowMatrix &batch) {
  if (batch.cols() != net.Arch().InputDim())
    throw DataError("input dimension " + std::to_string(batch.cols()) +
                    " does not match network input " +
                    std::to_string(net.Arch().InputDim()));
}

RowMatrix RunLayers(const ProjectionNet &net, const RowMatrix &batch,
                    ForwardTrace *trace) {
  CheckBatch(net, batch);
  const NetArch &arch = net.Arch();
  RowMatrix a = batch;
  for (int l = 0; l < arch.NumLayers(); ++l) {
    RowMatrix z = a * net.Weight(l).transpose();
    z.rowwise() += net.Bias(l).transpose();
    RowMatrix next;
    ApplyActivation(arch.LayerActivation(l), z, &next);
    if (trace) trace->pre.push_back(std::move(z));
    a = std::move(next);
    if (trace) trace->post.push_back(a);
  }
  return a;
}

}  // namespace

ForwardTrace Forward(const ProjectionNet &net, const RowMatrix &batch) {
  ForwardTrace t;
  t.input = batch;
  RunLayers(net, batch, &t);
  const RowMatrix &emb = t.post.back();
  if (net.Arch().head == HeadKind::kSoftmaxLinear) {
    t.logits = emb * net.HeadWeight().transpose();
    t.logits.rowwise() += net.HeadBias().transpose();
  } else {
    t.emb_unit = NormalizeRows(emb, "embedding");
    t.weight_unit = NormalizeRows(net.HeadWeight(), "class weight");
    t.logits = t.emb_unit.unit * t.weight_unit.unit.transpose();
  }
  return t;
}

Vector Embed(const ProjectionNet &net, const Vector &vector) {
  if (vector.size() != net.Arch().InputDim())
    throw DataError("input dimension " + std::to_string(vector.size()) +
                    " does not match network input " +
                    std::to_string(net.Arch().InputDim()));
  RowMatrix row = vector.transpose();
  return RunLayers(net, row, nullptr).row(0).transpose();
}

RowMatrix EmbedBatch(const ProjectionNet &net, const RowMatrix &batch) {
  return RunLayers(net, batch, nullptr);
}

LossResult HeadLoss(const ProjectionNet &net, const ForwardTrace &trace,
                    std::span<const int> labels, const LossSpec &spec) {
  if (spec.kind != net.Arch().head)
    throw ConfigError("loss kind does not match the network head");
  if (spec.kind == HeadKind::kSoftmaxLinear)
    return SoftmaxCe(trace.logits, labels);
  MarginLogits ml = ApplyAngularMargin(trace.logits, labels, spec.aam);
  LossResult ce = SoftmaxCe(ml.logits, labels);
  ce.grad = ce.grad.cwiseProduct(ml.first);
  return ce;
}

ParamGrads Backward(const ProjectionNet &net, const ForwardTrace &trace,
                    const RowMatrix &loss_grad_on_logits) {
  const NetArch &arch = net.Arch();
  const int layers = arch.NumLayers();
  if (static_cast<int>(trace.pre.size()) != layers ||
      trace.input.cols() != arch.InputDim() ||
      trace.post.back().cols() != arch.EmbeddingDim() ||
      loss_grad_on_logits.rows() != trace.input.rows() ||
      loss_grad_on_logits.cols() != arch.n_classes)
    throw DataError("backward: trace does not match the network");

  ParamGrads g(arch);
  const RowMatrix &emb = trace.post.back();
  const RowMatrix &gy = loss_grad_on_logits;
  RowMatrix ga;
  if (arch.head == HeadKind::kSoftmaxLinear) {
    g.HeadWeight() = gy.transpose() * emb;
    g.HeadBias() = gy.colwise().sum().transpose();
    ga = gy * net.HeadWeight();
  } else {
    ga = NormalizeRowsBackward(trace.emb_unit, gy * trace.weight_unit.unit);
    g.HeadWeight() = NormalizeRowsBackward(
        trace.weight_unit, gy.transpose() * trace.emb_unit.unit);
  }
  for (int l = layers - 1; l >= 0; --l) {
    RowMatrix gz = ga.cwiseProduct(ActivationDeriv(
        arch.LayerActivation(l), trace.pre[l], trace.post[l]));
    const RowMatrix &prev = l == 0 ? trace.input : trace.post[l - 1];
    g.Weight(l) = gz.transpose() * prev;
    g.Bias(l) = gz.colwise().sum().transpose();
    if (l > 0) ga = gz * net.Weight(l);
  }
  return g;
}

LossAndGrad ComputeLossAndGrad(const ProjectionNet &net, const Batch &batch,
                               const LossSpec &spec) {
  ForwardTrace trace = Forward(net, batch.vectors);
  LossResult lr = HeadLoss(net, trace, batch.labels, spec);
  return {lr.loss, Backward(net, trace, lr.grad)};
}

ParamGrads Hvp(const ProjectionNet &net, const Batch &batch,
               const LossSpec &spec, const ParamGrads &v) {
  if (!v.SameShape(net))
    throw DataError("hvp: direction does not match the network shape");
  if (spec.kind != net.Arch().head)
    throw ConfigError("loss kind does not match the network head");
  const NetArch &arch = net.Arch();
  const int layers = arch.NumLayers();
  const ForwardTrace t = Forward(net, batch.vectors);
  const Eigen::Index n = batch.vectors.rows();
  const RowMatrix &emb = t.post.back();

  // Forward tangents of pre- and post-activations along v.
  std::vector<RowMatrix> z_dot(layers), a_dot(layers);
  for (int l = 0; l < layers; ++l) {
    const RowMatrix &prev = l == 0 ? t.input : t.post[l - 1];
    z_dot[l] = prev * v.Weight(l).transpose();
    z_dot[l].rowwise() += v.Bias(l).transpose();
    if (l > 0) z_dot[l] += a_dot[l - 1] * net.Weight(l).transpose();
    a_dot[l] = z_dot[l].cwiseProduct(
        ActivationDeriv(arch.LayerActivation(l), t.pre[l], t.post[l]));
  }

  // Softmax cross-entropy gradient and its tangent, given the logits fed to
  // the softmax and their tangent.
  auto ce_grad = [&](const RowMatrix &logits, const RowMatrix &logits_dot,
                     RowMatrix *g, RowMatrix *g_dot) {
    RowMatrix p = Softmax(logits);
    *g = p;
    for (Eigen::Index i = 0; i < n; ++i) (*g)(i, batch.labels[i]) -= 1.0;
    *g /= static_cast<double>(n);
    Vector mean_dot = p.cwiseProduct(logits_dot).rowwise().sum();
    RowMatrix centered = logits_dot;
    centered.colwise() -= mean_dot;
    *g_dot = p.cwiseProduct(centered) / static_cast<double>(n);
  };

  ParamGrads hv(arch);
  RowMatrix ga, ga_dot;
  if (arch.head == HeadKind::kSoftmaxLinear) {
    RowMatrix y_dot = a_dot.back() * net.HeadWeight().transpose() +
                      emb * v.HeadWeight().transpose();
    y_dot.rowwise() += v.HeadBias().transpose();
    RowMatrix gy, gy_dot;
    ce_grad(t.logits, y_dot, &gy, &gy_dot);
    hv.HeadWeight() = gy_dot.transpose() * emb + gy.transpose() * a_dot.back();
    hv.HeadBias() = gy_dot.colwise().sum().transpose();
    ga = gy * net.HeadWeight();
    ga_dot = gy_dot * net.HeadWeight() + gy * v.HeadWeight();
  } else {
    const NormalizedRowsTangent tx =
        NormalizeRowsTangent(t.emb_unit, a_dot.back());
    const NormalizedRowsTangent tw =
        NormalizeRowsTangent(t.weight_unit, v.HeadWeight());
    const RowMatrix &xu = t.emb_unit.unit;
    const RowMatrix &wu = t.weight_unit.unit;
    const RowMatrix c_dot =
        tx.unit_dot * wu.transpose() + xu * tw.unit_dot.transpose();
    const MarginLogits ml = ApplyAngularMargin(t.logits, batch.labels,
                                               spec.aam);
    RowMatrix gy, gy_dot;
    ce_grad(ml.logits, ml.first.cwiseProduct(c_dot), &gy, &gy_dot);
    const RowMatrix gc = gy.cwiseProduct(ml.first);
    const RowMatrix gc_dot = gy_dot.cwiseProduct(ml.first) +
                             gy.cwiseProduct(ml.second).cwiseProduct(c_dot);
    const RowMatrix gx = gc * wu;
    const RowMatrix gx_dot = gc_dot * wu + gc * tw.unit_dot;
    const RowMatrix gw = gc.transpose() * xu;
    const RowMatrix gw_dot = gc_dot.transpose() * xu +
                             gc.transpose() * tx.unit_dot;
    ga = NormalizeRowsBackward(t.emb_unit, gx);
    ga_dot = NormalizeRowsBackwardTangent(t.emb_unit, tx, gx, gx_dot);
    hv.HeadWeight() =
        NormalizeRowsBackwardTangent(t.weight_unit, tw, gw, gw_dot);
  }

  for (int l = layers - 1; l >= 0; --l) {
    const Activation act = arch.LayerActivation(l);
    const RowMatrix d1 = ActivationDeriv(act, t.pre[l], t.post[l]);
    const RowMatrix gz = ga.cwiseProduct(d1);
    RowMatrix gz_dot = ga_dot.cwiseProduct(d1);
    if (act == Activation::kTanh)
      gz_dot += ga.cwiseProduct(ActivationDeriv2(act, t.pre[l], t.post[l]))
                    .cwiseProduct(z_dot[l]);
    const RowMatrix &prev = l == 0 ? t.input : t.post[l - 1];
    hv.Weight(l) = gz_dot.transpose() * prev;
    if (l > 0) hv.Weight(l) += gz.transpose() * a_dot[l - 1];
    hv.Bias(l) = gz_dot.colwise().sum().transpose();
    if (l > 0) {
      ga_dot = gz_dot * net.Weight(l) + gz * v.Weight(l);
      ga = gz * net.Weight(l);
    }
  }
  return hv;
}

ParamSet AxpyParams(const ParamSet &theta, const ParamGrads &g, double scale) {
  if (!theta.SameShape(g))
    throw DataError("axpy: parameter shapes differ");
  ParamSet out = theta;
  out.Values() += scale * g.Values();
  return out;
}

Json NetToJson(const ProjectionNet &net) {
  const NetArch &arch = net.Arch();
  Json layers = Json::array();
  for (int l = 0; l < arch.NumLayers(); ++l) {
    auto w = net.Weight(l);
    Vector flat = Eigen::Map<const Vector>(w.data(), w.size());
    layers.push_back(Json{{"weight", VectorToJson(flat)},
                          {"bias", VectorToJson(net.Bias(l))}});
  }
  auto hw = net.HeadWeight();
  Vector head_flat = Eigen::Map<const Vector>(hw.data(), hw.size());
  Json head{{"weight", VectorToJson(head_flat)}};
  if (arch.head == HeadKind::kSoftmaxLinear)
    head["bias"] = VectorToJson(net.HeadBias());
  return Json{{"layer_dims", arch.layer_dims},
              {"hidden_activation", ActivationName(arch.hidden_activation)},
              {"embedding_activation",
               ActivationName(arch.embedding_activation)},
              {"head_kind", HeadKindName(arch.head)},
              {"n_classes", arch.n_classes},
              {"layers", layers},
              {"head", head}};
}

ProjectionNet NetFromJson(const Json &j) {
  try {
    CheckKeys(j,
              {"layer_dims", "hidden_activation", "embedding_activation",
               "head_kind", "n_classes", "layers", "head"},
              "checkpoint");
    NetArch arch;
    arch.layer_dims = j.at("layer_dims").get<std::vector<int>>();
    arch.hidden_activation =
        ParseActivation(j.at("hidden_activation").get<std::string>());
    arch.embedding_activation =
        ParseActivation(j.at("embedding_activation").get<std::string>());
    arch.head = ParseHeadKind(j.at("head_kind").get<std::string>());
    arch.n_classes = j.at("n_classes").get<int>();
    ProjectionNet net(arch);
    const Json &layers = j.at("layers");
    if (!layers.is_array() ||
        static_cast<int>(layers.size()) != arch.NumLayers())
      throw DataError("checkpoint: wrong number of layers");
    auto fill = [](auto dst, const Json &src, const char *what) {
      Vector v = VectorFromJson(src, what);
      if (v.size() != dst.size())
        throw DataError(std::string("checkpoint: wrong size for ") + what);
      std::copy(v.data(), v.data() + v.size(), dst.data());
    };
    for (int l = 0; l < arch.NumLayers(); ++l) {
      fill(net.Weight(l), layers[l].at("weight"), "weight");
      fill(net.Bias(l), layers[l].at("bias"), "bias");
    }
    fill(net.HeadWeight(), j.at("head").at("weight"), "head weight");
    if (arch.head == HeadKind::kSoftmaxLinear)
      fill(net.HeadBias(), j.at("head").at("bias"), "head bias");
    if (!net.Values().allFinite())
      throw DataError("checkpoint: non-finite parameter");
    return net;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void SaveNet(const ProjectionNet &net, const std::string &path) {
  WriteJsonFile(NetToJson(net), path);
}

ProjectionNet LoadNet(const std::string &path) {
  return NetFromJson(ReadJsonFile(path));
}

}  // namespace rmaml
