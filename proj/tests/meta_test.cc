// tests/meta_test.cc

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

#include "doctest.h"

#include <cmath>
#include <map>

#include "nncore_oracle.h"
#include "rmaml/meta.h"
#include "rmaml/synth.h"
#include "test_util.h"

using namespace rmaml;
using namespace rmaml::testing;

namespace {

// L(theta) = 0.5 theta^T A theta + b^T theta.
Objective Quadratic(const Matrix &a, const Vector &b) {
  Objective obj;
  obj.loss_and_grad = [a, b](const Vector &theta, Vector *grad) {
    if (grad) *grad = a * theta + b;
    return 0.5 * theta.dot(a * theta) + b.dot(theta);
  };
  obj.hvp = [a](const Vector &, const Vector &v) { return Vector(a * v); };
  return obj;
}

Matrix RandomSymmetric(Rng &rng, int n) {
  Matrix m = RandomMatrix(rng, n, n);
  return 0.5 * (m + m.transpose());
}

// A meta-gradient instance: random net, local and meta batches.
struct MetaInstance {
  ProjectionNet net;
  Episode episode;
  LossSpec spec;
};

MetaInstance MakeMetaInstance(int seed) {
  RandomInstance base = MakeRandomInstance(seed);
  Rng rng(0xabc0 + seed);
  MetaInstance m{base.net, {}, base.spec};
  m.episode.local_batch = base.batch;
  const int n = 1 + static_cast<int>(UniformIndex(rng, 5));
  m.episode.meta_batch.vectors =
      RandomMatrix(rng, n, base.net.Arch().InputDim());
  m.episode.meta_batch.labels = RandomLabels(rng, n, base.net.Arch().n_classes);
  return m;
}

double MetaLossAt(const MetaInstance &m, const Vector &theta, double alpha) {
  ProjectionNet net = m.net;
  net.Values() = theta;
  LocalResult lr = LocalUpdate(net, m.episode.local_batch, m.spec, alpha);
  ProjectionNet adapted = m.net;
  adapted.Values() = lr.adapted;
  return ComputeLossAndGrad(adapted, m.episode.meta_batch, m.spec).loss;
}

TrainingData SynthTrainingData(int speakers, int domains, int utts,
                               std::uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.dim = 16;
  cfg.latent_dim = 6;
  cfg.n_speakers = speakers;
  cfg.n_domains = domains;
  cfg.utts_per_speaker_domain = utts;
  cfg.seed = seed;
  return MakeTrainingData(GenerateSsmc(cfg));
}

ProjectionNet SmallNet(int input, int classes, HeadKind head, int seed = 4) {
  NetArch arch;
  arch.layer_dims = {input, 24, 12};
  arch.n_classes = classes;
  arch.head = head;
  return InitNet(arch, seed);
}

}  // namespace

TEST_CASE("local update on a one-parameter quadratic") {
  Objective obj;
  obj.loss_and_grad = [](const Vector &t, Vector *g) {
    if (g) *g = Vector::Constant(1, 2 * (t[0] - 3));
    return (t[0] - 3) * (t[0] - 3);
  };
  LocalResult r = LocalUpdate(obj, Vector::Constant(1, 1.0), 0.1);
  CHECK(r.adapted[0] == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(r.loss == 4.0);
}

TEST_CASE("local update: alpha zero and composition with axpy") {
  for (int seed = 0; seed < 6; ++seed) {
    RandomInstance inst = MakeRandomInstance(seed);
    LocalResult zero = LocalUpdate(inst.net, inst.batch, inst.spec, 0.0);
    CHECK(zero.adapted == inst.net.Values());
    const double alpha = 0.3;
    LocalResult r = LocalUpdate(inst.net, inst.batch, inst.spec, alpha);
    LossAndGrad lg = ComputeLossAndGrad(inst.net, inst.batch, inst.spec);
    CHECK(r.adapted == AxpyParams(inst.net, lg.grad, -alpha).Values());
    CHECK(r.loss == lg.loss);
  }
}

TEST_CASE("meta gradient of quadratics equals (I - alpha A) g'") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 5;
    const Matrix a = RandomSymmetric(rng, n), c = RandomSymmetric(rng, n);
    const Vector b = RandomVector(rng, n), d = RandomVector(rng, n);
    const Vector theta = RandomVector(rng, n);
    const double alpha = 0.05 * (1 + trial);
    MetaGradientResult r = MetaGradient(Quadratic(a, b), Quadratic(c, d),
                                        theta, alpha, MetaMode::kSecondOrder);
    const Vector adapted = theta - alpha * (a * theta + b);
    const Vector g_prime = c * adapted + d;
    const Vector expected =
        (Matrix::Identity(n, n) - alpha * a) * g_prime;
    CHECK((r.grad - expected).norm() <= 1e-12 * (1 + expected.norm()));
    MetaGradientResult fo = MetaGradient(Quadratic(a, b), Quadratic(c, d),
                                         theta, alpha, MetaMode::kFirstOrder);
    CHECK((fo.grad - g_prime).norm() <= 1e-12 * (1 + g_prime.norm()));
  }
}

TEST_CASE("second-order meta gradient matches finite differences") {
  double worst = 0.0;
  for (int seed = 0; seed < 24; ++seed) {
    CAPTURE(seed);
    MetaInstance m = MakeMetaInstance(seed);
    const double alpha = 0.1 + 0.1 * (seed % 4);
    MetaGradientResult r =
        MetaGradient(m.net, m.episode, m.spec, alpha, MetaMode::kSecondOrder);
    CHECK(r.meta_loss == doctest::Approx(MetaLossAt(m, m.net.Values(), alpha))
                             .epsilon(1e-14));
    const Vector fd = FdGradient(
        [&](const Vector &t) { return MetaLossAt(m, t, alpha); },
        m.net.Values());
    double excess = 0.0;
    const Eigen::Index bad = WorstMismatch(r.grad, fd, 1e-3, 1e-7, &excess);
    worst = std::max(worst, excess);
    if (bad >= 0)
      MESSAGE("param " << bad << ": analytic " << r.grad[bad] << " fd "
                       << fd[bad]);
    CHECK(bad == -1);
  }
  CHECK(worst == 0.0);
}

TEST_CASE("alpha zero: first and second order are bit-identical") {
  for (int seed = 0; seed < 20; ++seed) {
    MetaInstance m = MakeMetaInstance(seed);
    MetaGradientResult so =
        MetaGradient(m.net, m.episode, m.spec, 0.0, MetaMode::kSecondOrder);
    MetaGradientResult fo =
        MetaGradient(m.net, m.episode, m.spec, 0.0, MetaMode::kFirstOrder);
    LossAndGrad plain = ComputeLossAndGrad(m.net, m.episode.meta_batch, m.spec);
    CHECK(so.grad == fo.grad);
    CHECK(fo.grad == plain.grad.Values());
    CHECK(so.meta_loss == plain.loss);
  }
}

TEST_CASE("episode sampling: domain constraints and errors") {
  TrainingData two = SynthTrainingData(4, 2, 2);
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    Episode ep = SampleEpisode(two, 3, Scheme::kRobustMaml, rng);
    CHECK(ep.meta_domain == 1 - ep.local_domain);
    CHECK(ep.local_batch.labels.size() == 3);
    Episode st = SampleEpisode(two, 3, Scheme::kStandardMaml, rng);
    CHECK(st.meta_domain == st.local_domain);
  }
  TrainingData one = SynthTrainingData(4, 1, 2);
  CHECK_THROWS_AS(SampleEpisode(one, 3, Scheme::kRobustMaml, rng), DataError);
  CHECK_NOTHROW(SampleEpisode(one, 3, Scheme::kStandardMaml, rng));
  CHECK_THROWS_AS(SampleEpisode(two, 9, Scheme::kRobustMaml, rng), DataError);

  // Batches are drawn without replacement and carry matching labels.
  TrainingData data = SynthTrainingData(5, 2, 3);
  Episode ep = SampleEpisode(data, 15, Scheme::kRobustMaml, rng);
  const DomainData &dom = data.domains[ep.local_domain];
  std::vector<bool> used(dom.labels.size(), false);
  for (int r = 0; r < 15; ++r) {
    int match = -1;
    for (std::size_t i = 0; i < dom.labels.size(); ++i)
      if (dom.vectors.row(i) == ep.local_batch.vectors.row(r)) match = i;
    REQUIRE(match >= 0);
    CHECK(!used[match]);
    used[match] = true;
    CHECK(dom.labels[match] == ep.local_batch.labels[r]);
  }
}

TEST_CASE("episode sampling: local domain frequencies") {
  TrainingData data = SynthTrainingData(3, 5, 1);
  Rng rng(2);
  const int draws = 10000;
  std::vector<int> local(5, 0), meta(5, 0);
  for (int k = 0; k < draws; ++k) {
    Episode ep = SampleEpisode(data, 2, Scheme::kRobustMaml, rng);
    CHECK(ep.local_domain != ep.meta_domain);
    ++local[ep.local_domain];
    ++meta[ep.meta_domain];
  }
  const double p = 0.2, sigma = std::sqrt(draws * p * (1 - p));
  for (int d = 0; d < 5; ++d) {
    CHECK(std::abs(local[d] - draws * p) < 3 * sigma);
    CHECK(std::abs(meta[d] - draws * p) < 3 * sigma);
  }
}

TEST_CASE("alpha zero: meta updates follow the plain SGD trajectory") {
  TrainingData data = SynthTrainingData(6, 3, 4);
  for (HeadKind head : {HeadKind::kSoftmaxLinear, HeadKind::kAam}) {
    LossSpec spec;
    spec.kind = head;
    ProjectionNet maml = SmallNet(16, 6, head), mct = maml;
    TrainConfig cfg;
    cfg.alpha = 0.0;
    cfg.beta = 0.1;
    Rng rng(9);
    for (int it = 0; it < 25; ++it) {
      Episode ep = SampleEpisode(data, 8, Scheme::kRobustMaml, rng);
      MetaStep(&maml, ep, cfg, spec);
      MctStep(&mct, ep.meta_batch, cfg.beta, spec);
    }
    CHECK(maml == mct);
  }
}

TEST_CASE("training: zero iterations, determinism, logged domains") {
  TrainingData data = SynthTrainingData(6, 3, 4);
  LossSpec spec;
  ProjectionNet init = SmallNet(16, 6, HeadKind::kSoftmaxLinear);
  TrainConfig cfg;
  cfg.iterations = 0;
  TrainResult none = Train(data, init, cfg, spec);
  CHECK(none.net == init);
  CHECK(none.log.iterations.empty());

  cfg.iterations = 30;
  cfg.batch_size = 8;
  cfg.eval_every = 10;
  int probe_calls = 0;
  ProbeFn probe = [&](const ProjectionNet &) {
    ++probe_calls;
    return std::vector<std::pair<std::string, double>>{{"held", 0.25}};
  };
  TrainResult a = Train(data, init, cfg, spec, probe);
  TrainResult b = Train(data, init, cfg, spec, probe);
  CHECK(a.net == b.net);
  CHECK(IterationLogToCsv(a.log) == IterationLogToCsv(b.log));
  CHECK(probe_calls == 6);
  REQUIRE(a.log.probes.size() == 3);
  CHECK(a.log.probes[2].iteration == 30);
  REQUIRE(a.log.iterations.size() == 30);
  for (std::size_t i = 0; i < a.log.iterations.size(); ++i) {
    CHECK(a.log.iterations[i].iteration == static_cast<long>(i + 1));
    CHECK(a.log.iterations[i].local_domain != a.log.iterations[i].meta_domain);
  }
  CHECK(!(a.net == init));
  CHECK(ProbeLogToCsv(a.log).rfind("iter,domain,eer\n10,held,0.25\n", 0) == 0);

  cfg.scheme = Scheme::kMct;
  TrainResult m = Train(data, init, cfg, spec);
  CHECK(m.log.iterations[0].local_domain == "pooled");
  CHECK(m.log.iterations[0].local_loss == m.log.iterations[0].meta_loss);
}

TEST_CASE("training: divergence is reported with the iteration") {
  TrainingData data = SynthTrainingData(4, 2, 4);
  LossSpec spec;
  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.batch_size = 4;
  cfg.beta = 1e200;
  try {
    Train(data, SmallNet(16, 4, HeadKind::kSoftmaxLinear), cfg, spec);
    FAIL("expected divergence");
  } catch (const NumericError &e) {
    MESSAGE(std::string(e.what()));
    CHECK(std::string(e.what()).rfind("iteration ", 0) == 0);
  }
}

TEST_CASE("MCT decreases the smoothed training loss") {
  TrainingData data = SynthTrainingData(20, 4, 4);
  for (HeadKind head : {HeadKind::kSoftmaxLinear, HeadKind::kAam}) {
    LossSpec spec;
    spec.kind = head;
    TrainConfig cfg;
    cfg.scheme = Scheme::kMct;
    cfg.iterations = 500;
    TrainResult r = Train(data, SmallNet(16, 20, head), cfg, spec);
    double first = 0, last = 0;
    for (int i = 0; i < 100; ++i) {
      first += r.log.iterations[i].local_loss;
      last += r.log.iterations[400 + i].local_loss;
    }
    MESSAGE(HeadKindName(head) << ": " << first / 100 << " -> " << last / 100);
    CHECK(last < first);
  }
}

TEST_CASE("training with disjoint speakers per domain") {
  // Two domains whose speaker sets do not overlap, in one label space.
  SynthConfig scfg;
  scfg.dim = 16;
  scfg.latent_dim = 6;
  scfg.n_speakers = 8;
  scfg.n_domains = 2;
  scfg.utts_per_speaker_domain = 4;
  EmbeddingDataset full = GenerateSsmc(scfg);
  EmbeddingDataset ds(16);
  for (const EmbeddingRecord &r : full.Records()) {
    const bool first_half = full.SpeakerIndex(r.speaker_id) < 4;
    if (first_half == (r.domain_id == "dom00")) ds.Add(r);
  }
  TrainingData data = MakeTrainingData(ds);
  REQUIRE(data.domains.size() == 2);
  for (int l : data.domains[0].labels) CHECK(l < 4);
  for (int l : data.domains[1].labels) CHECK(l >= 4);
  LossSpec spec;
  TrainConfig cfg;
  cfg.iterations = 40;
  cfg.batch_size = 8;
  TrainResult r = Train(data, SmallNet(16, 8, HeadKind::kSoftmaxLinear), cfg,
                        spec);
  for (const IterationRecord &rec : r.log.iterations) {
    CHECK(std::isfinite(rec.local_loss));
    CHECK(std::isfinite(rec.meta_loss));
  }
}

TEST_CASE("train config json") {
  TrainConfig c;
  Json j = c;
  CHECK(j.get<TrainConfig>().alpha == c.alpha);
  CHECK(Json(j.get<TrainConfig>()) == j);
  CHECK_THROWS_AS((Json{{"alpah", 0.1}}.get<TrainConfig>()), ConfigError);
  CHECK_THROWS_AS((Json{{"alpha", 0.0}}.get<TrainConfig>()), ConfigError);
  CHECK_THROWS_AS((Json{{"batch_size", 1}}.get<TrainConfig>()), ConfigError);
  CHECK_THROWS_AS((Json{{"scheme", "reptile"}}.get<TrainConfig>()),
                  ConfigError);
  CHECK(Json{{"meta_mode", "first_order"}}.get<TrainConfig>().meta_mode ==
        MetaMode::kFirstOrder);
}
