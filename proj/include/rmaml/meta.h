// include/rmaml/meta.h

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

#ifndef RMAML_META_H_
#define RMAML_META_H_

#include <functional>
#include <string>
#include <vector>

#include "rmaml/common.h"
#include "rmaml/json_util.h"
#include "rmaml/losses.h"
#include "rmaml/nncore.h"
#include "rmaml/vecio.h"

namespace rmaml {

enum class MetaMode { kSecondOrder, kFirstOrder };
enum class Scheme { kRobustMaml, kStandardMaml, kMct };

std::string MetaModeName(MetaMode m);
MetaMode ParseMetaMode(const std::string &name);
std::string SchemeName(Scheme s);
Scheme ParseScheme(const std::string &name);

/// Settings of the `train` config section.
struct TrainConfig {
  double alpha = 0.25;
  double beta = 0.05;
  int batch_size = 32;
  long iterations = 2000;
  MetaMode meta_mode = MetaMode::kSecondOrder;
  Scheme scheme = Scheme::kRobustMaml;
  long eval_every = 0;
  std::uint64_t seed = 1;

  void Check() const;
};

void to_json(Json &j, const TrainConfig &c);
void from_json(const Json &j, TrainConfig &c);

/// Training records grouped by domain, labelled in one shared speaker index.
struct DomainData {
  std::string domain;
  RowMatrix vectors;
  std::vector<int> labels;
};

struct TrainingData {
  std::vector<DomainData> domains;
  int n_classes = 0;
  /// Every record, in dataset order.
  Batch pooled;
};

TrainingData MakeTrainingData(const EmbeddingDataset &ds);

struct Episode {
  int local_domain = 0;
  int meta_domain = 0;
  Batch local_batch;
  Batch meta_batch;
};

/// batch_size rows drawn uniformly without replacement.
Batch SampleBatch(const RowMatrix &vectors, const std::vector<int> &labels,
                  int batch_size, Rng &rng);

/// Local domain uniform; the meta domain is uniform over the other domains
/// for robust_maml and equal to the local one for standard_maml.
Episode SampleEpisode(const TrainingData &data, int batch_size, Scheme scheme,
                      Rng &rng);

/// A differentiable objective over a flat parameter vector.
struct Objective {
  /// Returns the loss and writes the gradient.
  std::function<double(const Vector &theta, Vector *grad)> loss_and_grad;
  /// Hessian at theta times v.
  std::function<Vector(const Vector &theta, const Vector &v)> hvp;
};

/// The net loss on a fixed batch as an Objective over net.Values().  The
/// batch is held by reference and must outlive the objective.
Objective NetObjective(const NetArch &arch, const Batch &batch,
                       const LossSpec &spec);

struct LocalResult {
  Vector adapted;
  double loss = 0.0;
  Vector grad;  // gradient of the local loss at theta
};

/// theta' = theta - alpha * grad L_local(theta).
LocalResult LocalUpdate(const Objective &local, const Vector &theta,
                        double alpha);

struct MetaGradientResult {
  double local_loss = 0.0;
  double meta_loss = 0.0;
  Vector grad;
};

/// Gradient of L_meta(theta - alpha * grad L_local(theta)) with respect to
/// theta.  first_order drops the Hessian term.
MetaGradientResult MetaGradient(const Objective &local, const Objective &meta,
                                const Vector &theta, double alpha,
                                MetaMode mode);

/// Convenience forms on nets.
LocalResult LocalUpdate(const ProjectionNet &net, const Batch &batch,
                        const LossSpec &spec, double alpha);
MetaGradientResult MetaGradient(const ProjectionNet &net,
                                const Episode &episode, const LossSpec &spec,
                                double alpha, MetaMode mode);

struct IterationRecord {
  long iteration = 0;
  std::string local_domain;
  std::string meta_domain;
  double local_loss = 0.0;
  double meta_loss = 0.0;
};

struct ProbeRecord {
  long iteration = 0;
  std::string domain;
  double eer = 0.0;
};

struct TrainingLog {
  std::vector<IterationRecord> iterations;
  std::vector<ProbeRecord> probes;
};

/// One meta update in place; returns the logged losses.
MetaGradientResult MetaStep(ProjectionNet *net, const Episode &episode,
                            const TrainConfig &cfg, const LossSpec &spec);
/// One plain SGD step in place with learning rate beta; returns the loss.
double MctStep(ProjectionNet *net, const Batch &batch, double beta,
               const LossSpec &spec);

/// Evaluates the current net on held-out data: (domain, eer) pairs.
using ProbeFn = std::function<std::vector<std::pair<std::string, double>>(
    const ProjectionNet &net)>;

struct TrainResult {
  ProjectionNet net;
  TrainingLog log;
};

/// Runs cfg.iterations updates of cfg.scheme starting from `net`.  The probe
/// runs after every eval_every-th update.  Throws NumericError naming the
/// iteration on a non-finite loss or gradient.
TrainResult Train(const TrainingData &data, const ProjectionNet &net,
                  const TrainConfig &cfg, const LossSpec &spec,
                  const ProbeFn &probe = nullptr);

std::string IterationLogToCsv(const TrainingLog &log);
std::string ProbeLogToCsv(const TrainingLog &log);

}  // namespace rmaml

#endif  // RMAML_META_H_
