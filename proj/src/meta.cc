// src/meta.cc

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

#include "rmaml/meta.h"

#include <cmath>
#include <numeric>

namespace rmaml {

namespace {

// Stream tags for the trainer's random draws.
constexpr std::uint64_t kEpisodeStream = 0x6d657461;  // "meta"
constexpr std::uint64_t kPooledStream = 0x6d637400;   // "mct"

void CheckFinite(double loss, const Vector &grad, const char *what) {
  if (!std::isfinite(loss)) throw NumericError(std::string("non-finite ") + what);
  if (!grad.allFinite())
    throw NumericError(std::string("non-finite gradient of the ") + what);
}

}  // namespace

std::string MetaModeName(MetaMode m) {
  return m == MetaMode::kSecondOrder ? "second_order" : "first_order";
}

MetaMode ParseMetaMode(const std::string &name) {
  if (name == "second_order") return MetaMode::kSecondOrder;
  if (name == "first_order") return MetaMode::kFirstOrder;
  throw ConfigError("unknown meta_mode '" + name +
                    "' (expected second_order or first_order)");
}

std::string SchemeName(Scheme s) {
  switch (s) {
    case Scheme::kRobustMaml: return "robust_maml";
    case Scheme::kStandardMaml: return "standard_maml";
    case Scheme::kMct: return "mct";
  }
  return "?";
}

Scheme ParseScheme(const std::string &name) {
  if (name == "robust_maml") return Scheme::kRobustMaml;
  if (name == "standard_maml") return Scheme::kStandardMaml;
  if (name == "mct") return Scheme::kMct;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected robust_maml, standard_maml or mct)");
}

void TrainConfig::Check() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("train.alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw ConfigError("train.beta must be > 0");
  if (batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
  if (iterations < 0) throw ConfigError("train.iterations must be >= 0");
  if (eval_every < 0) throw ConfigError("train.eval_every must be >= 0");
}

void to_json(Json &j, const TrainConfig &c) {
  j = Json{{"alpha", c.alpha},
           {"beta", c.beta},
           {"batch_size", c.batch_size},
           {"iterations", c.iterations},
           {"meta_mode", MetaModeName(c.meta_mode)},
           {"scheme", SchemeName(c.scheme)},
           {"eval_every", c.eval_every},
           {"seed", c.seed}};
}

void from_json(const Json &j, TrainConfig &c) {
  const std::string s = "train";
  CheckKeys(j,
            {"alpha", "beta", "batch_size", "iterations", "meta_mode", "scheme",
             "eval_every", "seed"},
            s);
  ReadKey(j, "alpha", &c.alpha, s);
  ReadKey(j, "beta", &c.beta, s);
  ReadKey(j, "batch_size", &c.batch_size, s);
  ReadKey(j, "iterations", &c.iterations, s);
  std::string mode = MetaModeName(c.meta_mode), scheme = SchemeName(c.scheme);
  ReadKey(j, "meta_mode", &mode, s);
  ReadKey(j, "scheme", &scheme, s);
  c.meta_mode = ParseMetaMode(mode);
  c.scheme = ParseScheme(scheme);
  ReadKey(j, "eval_every", &c.eval_every, s);
  ReadKey(j, "seed", &c.seed, s);
  c.Check();
}

TrainingData MakeTrainingData(const EmbeddingDataset &ds) {
  TrainingData out;
  out.n_classes = ds.NumSpeakers();
  out.pooled.vectors = ds.VectorMatrix();
  out.pooled.labels.resize(ds.Size());
  for (std::size_t i = 0; i < ds.Size(); ++i)
    out.pooled.labels[i] = ds.Label(i);
  const auto &domains = ds.Domains();
  out.domains.resize(domains.size());
  std::vector<std::vector<Eigen::Index>> rows(domains.size());
  for (std::size_t i = 0; i < ds.Size(); ++i)
    rows[ds.DomainIndex(ds.Record(i).domain_id)].push_back(i);
  for (std::size_t d = 0; d < domains.size(); ++d) {
    DomainData &dd = out.domains[d];
    dd.domain = domains[d];
    dd.vectors.resize(rows[d].size(), ds.Dim());
    for (std::size_t r = 0; r < rows[d].size(); ++r) {
      dd.vectors.row(r) = out.pooled.vectors.row(rows[d][r]);
      dd.labels.push_back(out.pooled.labels[rows[d][r]]);
    }
  }
  return out;
}

Batch SampleBatch(const RowMatrix &vectors, const std::vector<int> &labels,
                  int batch_size, Rng &rng) {
  const std::size_t n = labels.size();
  if (batch_size < 1 || static_cast<std::size_t>(batch_size) > n)
    throw DataError("cannot draw a batch of " + std::to_string(batch_size) +
                    " from " + std::to_string(n) + " records");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Batch b;
  b.vectors.resize(batch_size, vectors.cols());
  b.labels.resize(batch_size);
  for (int k = 0; k < batch_size; ++k) {
    std::swap(idx[k], idx[k + UniformIndex(rng, n - k)]);
    b.vectors.row(k) = vectors.row(idx[k]);
    b.labels[k] = labels[idx[k]];
  }
  return b;
}

Episode SampleEpisode(const TrainingData &data, int batch_size, Scheme scheme,
                      Rng &rng) {
  const int nd = static_cast<int>(data.domains.size());
  if (scheme == Scheme::kMct)
    throw ConfigError("the mct scheme does not use episodes");
  if (nd < 1 || (scheme == Scheme::kRobustMaml && nd < 2))
    throw DataError(SchemeName(scheme) + " needs at least " +
                    (scheme == Scheme::kRobustMaml ? "two" : "one") +
                    " training domains, got " + std::to_string(nd));
  for (const DomainData &d : data.domains)
    if (d.labels.size() < static_cast<std::size_t>(batch_size))
      throw DataError("domain '" + d.domain + "' has " +
                      std::to_string(d.labels.size()) +
                      " records, fewer than batch_size " +
                      std::to_string(batch_size));
  Episode ep;
  ep.local_domain = static_cast<int>(UniformIndex(rng, nd));
  if (scheme == Scheme::kRobustMaml) {
    const int k = static_cast<int>(UniformIndex(rng, nd - 1));
    ep.meta_domain = k >= ep.local_domain ? k + 1 : k;
  } else {
    ep.meta_domain = ep.local_domain;
  }
  const DomainData &li = data.domains[ep.local_domain];
  const DomainData &mj = data.domains[ep.meta_domain];
  ep.local_batch = SampleBatch(li.vectors, li.labels, batch_size, rng);
  ep.meta_batch = SampleBatch(mj.vectors, mj.labels, batch_size, rng);
  return ep;
}

Objective NetObjective(const NetArch &arch, const Batch &batch,
                       const LossSpec &spec) {
  auto as_net = [arch](const Vector &theta) {
    ProjectionNet net(arch);
    net.Values() = theta;
    return net;
  };
  Objective obj;
  obj.loss_and_grad = [as_net, &batch, spec](const Vector &theta, Vector *grad) {
    LossAndGrad lg = ComputeLossAndGrad(as_net(theta), batch, spec);
    if (grad) *grad = std::move(lg.grad.Values());
    return lg.loss;
  };
  obj.hvp = [arch, as_net, &batch, spec](const Vector &theta, const Vector &v) {
    ParamSet dir(arch);
    dir.Values() = v;
    return Vector(Hvp(as_net(theta), batch, spec, dir).Values());
  };
  return obj;
}

LocalResult LocalUpdate(const Objective &local, const Vector &theta,
                        double alpha) {
  LocalResult r;
  r.loss = local.loss_and_grad(theta, &r.grad);
  CheckFinite(r.loss, r.grad, "local loss");
  r.adapted = theta - alpha * r.grad;
  return r;
}

MetaGradientResult MetaGradient(const Objective &local, const Objective &meta,
                                const Vector &theta, double alpha,
                                MetaMode mode) {
  LocalResult lr = LocalUpdate(local, theta, alpha);
  MetaGradientResult out;
  out.local_loss = lr.loss;
  out.meta_loss = meta.loss_and_grad(lr.adapted, &out.grad);
  CheckFinite(out.meta_loss, out.grad, "meta loss");
  if (mode == MetaMode::kSecondOrder) {
    // d theta' / d theta = I - alpha * H_local(theta), which is symmetric.
    const Vector hg = local.hvp(theta, out.grad);
    out.grad -= alpha * hg;
    if (!out.grad.allFinite())
      throw NumericError("non-finite second-order meta gradient");
  }
  return out;
}

LocalResult LocalUpdate(const ProjectionNet &net, const Batch &batch,
                        const LossSpec &spec, double alpha) {
  return LocalUpdate(NetObjective(net.Arch(), batch, spec), net.Values(),
                     alpha);
}

MetaGradientResult MetaGradient(const ProjectionNet &net,
                                const Episode &episode, const LossSpec &spec,
                                double alpha, MetaMode mode) {
  return MetaGradient(NetObjective(net.Arch(), episode.local_batch, spec),
                      NetObjective(net.Arch(), episode.meta_batch, spec),
                      net.Values(), alpha, mode);
}

MetaGradientResult MetaStep(ProjectionNet *net, const Episode &episode,
                            const TrainConfig &cfg, const LossSpec &spec) {
  MetaGradientResult r =
      MetaGradient(*net, episode, spec, cfg.alpha, cfg.meta_mode);
  net->Values() -= cfg.beta * r.grad;
  return r;
}

double MctStep(ProjectionNet *net, const Batch &batch, double beta,
               const LossSpec &spec) {
  LossAndGrad lg = ComputeLossAndGrad(*net, batch, spec);
  CheckFinite(lg.loss, lg.grad.Values(), "training loss");
  net->Values() -= beta * lg.grad.Values();
  return lg.loss;
}

TrainResult Train(const TrainingData &data, const ProjectionNet &net,
                  const TrainConfig &cfg, const LossSpec &spec,
                  const ProbeFn &probe) {
  cfg.Check();
  if (net.Arch().n_classes < data.n_classes)
    throw ConfigError("net has " + std::to_string(net.Arch().n_classes) +
                      " classes but the data has " +
                      std::to_string(data.n_classes) + " speakers");
  if (net.Arch().InputDim() != data.pooled.vectors.cols())
    throw DataError("net input dimension does not match the data");
  TrainResult out{net, {}};
  Rng rng = MakeStream(cfg.seed,
                       cfg.scheme == Scheme::kMct ? kPooledStream
                                                  : kEpisodeStream,
                       0);
  for (long it = 1; it <= cfg.iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    try {
      if (cfg.scheme == Scheme::kMct) {
        Batch b = SampleBatch(data.pooled.vectors, data.pooled.labels,
                              cfg.batch_size, rng);
        rec.local_domain = rec.meta_domain = "pooled";
        rec.local_loss = rec.meta_loss = MctStep(&out.net, b, cfg.beta, spec);
      } else {
        Episode ep = SampleEpisode(data, cfg.batch_size, cfg.scheme, rng);
        MetaGradientResult r = MetaStep(&out.net, ep, cfg, spec);
        rec.local_domain = data.domains[ep.local_domain].domain;
        rec.meta_domain = data.domains[ep.meta_domain].domain;
        rec.local_loss = r.local_loss;
        rec.meta_loss = r.meta_loss;
      }
      if (!out.net.Values().allFinite())
        throw NumericError("parameters became non-finite");
    } catch (const NumericError &e) {
      throw NumericError("iteration " + std::to_string(it) + ": " + e.what());
    }
    out.log.iterations.push_back(std::move(rec));
    if (probe && cfg.eval_every > 0 && it % cfg.eval_every == 0) {
      for (auto &[domain, eer] : probe(out.net))
        out.log.probes.push_back(ProbeRecord{it, domain, eer});
    }
  }
  return out;
}

std::string IterationLogToCsv(const TrainingLog &log) {
  std::string out = "iter,local_domain,meta_domain,local_loss,meta_loss\n";
  for (const IterationRecord &r : log.iterations)
    out += std::to_string(r.iteration) + ',' + r.local_domain + ',' +
           r.meta_domain + ',' + FormatDouble(r.local_loss) + ',' +
           FormatDouble(r.meta_loss) + '\n';
  return out;
}

std::string ProbeLogToCsv(const TrainingLog &log) {
  std::string out = "iter,domain,eer\n";
  for (const ProbeRecord &r : log.probes)
    out += std::to_string(r.iteration) + ',' + r.domain + ',' +
           FormatDouble(r.eer) + '\n';
  return out;
}

}  // namespace rmaml
