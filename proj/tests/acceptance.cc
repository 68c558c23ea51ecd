// tests/acceptance.cc

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

// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance <experiment-config.json> <scratch-dir>
//
// The experiment config drives criteria 3 and 4 (the synthetic held-out
// domain comparison of raw, MCT and robust MAML projections).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "nncore_oracle.h"
#include "rmaml/cli.h"
#include "test_util.h"

using namespace rmaml;
using namespace rmaml::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// 1. Analytic parameter gradients against central differences.
void GradientSuite(Outcome *out) {
  const auto start = Clock::now();
  int instances = 0, heads[2] = {0, 0};
  for (int seed = 0; seed < 24; ++seed) {
    RandomInstance inst = MakeRandomInstance(seed);
    LossAndGrad lg = ComputeLossAndGrad(inst.net, inst.batch, inst.spec);
    auto f = [&](const Vector &t) {
      ProjectionNet net = inst.net;
      net.Values() = t;
      return ComputeLossAndGrad(net, inst.batch, inst.spec).loss;
    };
    const Vector fd = FdGradient(f, inst.net.Values());
    out->Require(WorstMismatch(lg.grad.Values(), fd, 1e-4, 1e-8) == -1,
                 "seed " + std::to_string(seed));
    ++instances;
    ++heads[inst.spec.kind == HeadKind::kAam];
  }
  const double secs = Seconds(start);
  out->Require(heads[0] > 0 && heads[1] > 0, "both heads covered");
  out->Require(secs < 30.0, "runtime under 30 s");
  out->detail << instances << " nets (" << heads[0] << " softmax_linear, "
              << heads[1] << " aam), rtol 1e-4, " << secs << " s";
}

// 2. Second-order meta gradient through the inner step.
void MetaGradientSuite(Outcome *out) {
  int instances = 0;
  for (int seed = 0; seed < 24; ++seed) {
    RandomInstance base = MakeRandomInstance(seed);
    Rng rng(0xacc0 + seed);
    Episode ep;
    ep.local_batch = base.batch;
    const int n = 1 + static_cast<int>(UniformIndex(rng, 5));
    ep.meta_batch.vectors = RandomMatrix(rng, n, base.net.Arch().InputDim());
    ep.meta_batch.labels = RandomLabels(rng, n, base.net.Arch().n_classes);
    const double alpha = 0.1 + 0.1 * (seed % 4);
    MetaGradientResult r =
        MetaGradient(base.net, ep, base.spec, alpha, MetaMode::kSecondOrder);
    auto f = [&](const Vector &t) {
      ProjectionNet net = base.net;
      net.Values() = t;
      LocalResult lr = LocalUpdate(net, ep.local_batch, base.spec, alpha);
      net.Values() = lr.adapted;
      return ComputeLossAndGrad(net, ep.meta_batch, base.spec).loss;
    };
    const Vector fd = FdGradient(f, base.net.Values());
    out->Require(WorstMismatch(r.grad, fd, 1e-3, 1e-7) == -1,
                 "fd seed " + std::to_string(seed));
    MetaGradientResult so =
        MetaGradient(base.net, ep, base.spec, 0.0, MetaMode::kSecondOrder);
    MetaGradientResult fo =
        MetaGradient(base.net, ep, base.spec, 0.0, MetaMode::kFirstOrder);
    out->Require(so.grad == fo.grad, "alpha=0 bit-identity seed " +
                                         std::to_string(seed));
    ++instances;
  }
  out->detail << instances
              << " instances, rtol 1e-3; first/second order bit-identical "
                 "at alpha=0";
}

// 3 and 4. Held-out domain comparison on synthetic data.
void HeldOutComparison(const ExperimentConfig &base, Outcome *ordinal,
                       Outcome *probe_check) {
  const auto start = Clock::now();
  const int seeds = 5;
  double raw_sum = 0, mct_sum = 0, maml_sum = 0;
  int probe_wins = 0;
  std::ostringstream per_seed;
  for (int s = 1; s <= seeds; ++s) {
    ExperimentConfig cfg = base;
    OverrideSeed(&cfg, s);
    EmbeddingDataset ds = GenerateSsmc(cfg.synth);
    DomainSplit split = SplitTrainEval(
        ds, std::set<std::string>(cfg.split.held_out_domains.begin(),
                                  cfg.split.held_out_domains.end()));
    TrainingData data = MakeTrainingData(split.train);
    NetArch arch =
        MakeArch(cfg.net, cfg.loss, ds.Dim(), split.train.NumSpeakers());
    ProjectionNet init = InitNet(arch, cfg.train.seed);
    TrialList trials = MakeDomainTrials(split.eval, cfg.eval);
    auto cosine_eer = [&](const Projector &p) {
      return 100.0 *
             ComputeEer(ScoreTrials(CosineScorer(), p, split.eval, trials,
                                    cfg.eval.threads))
                 .eer;
    };
    ProbeFn probe = MakeCosineProbe(split.eval, cfg.eval);

    TrainConfig mct_cfg = cfg.train, maml_cfg = cfg.train;
    mct_cfg.scheme = Scheme::kMct;
    maml_cfg.scheme = Scheme::kRobustMaml;
    TrainResult mct = Train(data, init, mct_cfg, cfg.loss, probe);
    TrainResult maml = Train(data, init, maml_cfg, cfg.loss, probe);

    Projector p_mct, p_maml;
    p_mct.ThenNet(mct.net);
    p_maml.ThenNet(maml.net);
    const double raw = cosine_eer(Projector());
    const double e_mct = cosine_eer(p_mct), e_maml = cosine_eer(p_maml);
    raw_sum += raw;
    mct_sum += e_mct;
    maml_sum += e_maml;

    // Final probe point, averaged over held-out domains.
    auto final_probe = [](const TrainingLog &log) -> double {
      if (log.probes.empty()) return NAN;
      const long last = log.probes.back().iteration;
      double sum = 0;
      int n = 0;
      for (const ProbeRecord &p : log.probes)
        if (p.iteration == last) sum += p.eer, ++n;
      return sum / n;
    };
    const double pm = final_probe(mct.log), pa = final_probe(maml.log);
    if (pa <= pm) ++probe_wins;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  " seed%d raw=%.3f mct=%.3f maml=%.3f probe(mct=%.3f "
                  "maml=%.3f)",
                  s, raw, e_mct, e_maml, 100 * pm, 100 * pa);
    per_seed << buf;
  }
  const double secs = Seconds(start);
  const double raw = raw_sum / seeds, mct = mct_sum / seeds,
               maml = maml_sum / seeds;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "mean held-out cosine EER%%: raw %.2f, MCT %.2f, MAML %.2f "
                "(%d iterations, %d seeds, %.0f s)",
                raw, mct, maml, static_cast<int>(base.train.iterations), seeds,
                secs);
  ordinal->detail << buf << ";" << per_seed.str();
  ordinal->Require(maml <= mct - 0.5, "MAML <= MCT - 0.5pp");
  ordinal->Require(mct < raw, "MCT < raw");
  ordinal->Require(secs < 600.0, "runtime under 10 min");
  probe_check->detail << "final probe MAML <= MCT in " << probe_wins << " of "
                      << seeds << " seeds";
  probe_check->Require(probe_wins >= 4, "at least 4 of 5 seeds");
}

double RelFrobenius(const Matrix &a, const Matrix &ref) {
  return (a - ref).norm() / ref.norm();
}

Matrix RandomSpd(Rng &rng, int d, double ridge) {
  Matrix a = RandomMatrix(rng, d, d);
  return a * a.transpose() / d + ridge * Matrix::Identity(d, d);
}

void SamplePlda(Rng &rng, const Vector &mu, const Matrix &b, const Matrix &w,
                int speakers, int per, RowMatrix *x, std::vector<int> *y) {
  const int d = static_cast<int>(mu.size());
  const Matrix lb = Eigen::LLT<Matrix>(b).matrixL();
  const Matrix lw = Eigen::LLT<Matrix>(w).matrixL();
  x->resize(speakers * per, d);
  y->clear();
  for (int s = 0; s < speakers; ++s) {
    const Vector ys = mu + lb * RandomVector(rng, d);
    for (int u = 0; u < per; ++u) {
      x->row(s * per + u) = (ys + lw * RandomVector(rng, d)).transpose();
      y->push_back(s);
    }
  }
}

// 5. PLDA EM, LLR closed forms and parameter recovery.
void PldaSuite(Outcome *out) {
  double worst_step = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(500 + seed);
    const int d = 2 + seed % 4;
    RowMatrix x;
    std::vector<int> y;
    SamplePlda(rng, RandomVector(rng, d), RandomSpd(rng, d, 0.1),
               RandomSpd(rng, d, 0.1), 8 + seed, 2 + seed % 3, &x, &y);
    PldaFitResult fit = FitPlda(x, y, 15);
    for (std::size_t i = 1; i < fit.log_likelihoods.size(); ++i)
      worst_step = std::min(worst_step, fit.log_likelihoods[i] -
                                            fit.log_likelihoods[i - 1]);
  }
  out->Require(worst_step >= -1e-8, "EM monotone");

  // Scalar closed form.
  const double b1 = 1.7, w1 = 0.4, mu1 = 0.3, e1 = 1.1, t1 = -0.2;
  PldaModel s(Vector::Constant(1, mu1), Matrix::Constant(1, 1, b1),
              Matrix::Constant(1, 1, w1));
  const double v = b1 + w1, det = v * v - b1 * b1, a = e1 - mu1, c = t1 - mu1;
  const double closed =
      (-std::log(2 * std::numbers::pi) - 0.5 * std::log(det) -
       0.5 * (v * a * a - 2 * b1 * a * c + v * c * c) / det) -
      (-std::log(2 * std::numbers::pi * v) - 0.5 * (a * a + c * c) / v);
  const double err1 = std::abs(
      s.LogLikelihoodRatio(Vector::Constant(1, e1), Vector::Constant(1, t1)) -
      closed);
  out->Require(err1 < 1e-6, "1-D closed form");

  // 2-D quadrature over the speaker mean.
  const Vector mu = (Vector(2) << 0.2, -0.1).finished();
  const Matrix b = (Matrix(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
  const Matrix w = (Matrix(2, 2) << 0.5, 0.1, 0.1, 0.3).finished();
  PldaModel m(mu, b, w);
  const Matrix bi = b.inverse(), wi = w.inverse();
  const Vector e = (Vector(2) << 1.0, 0.5).finished();
  const Vector t = (Vector(2) << 0.8, 0.9).finished();
  double joint = 0, pe = 0, pt = 0;
  const double h = 0.02;
  Vector yv(2);
  for (double u = -9; u <= 9; u += h)
    for (double z = -9; z <= 9; z += h) {
      yv << mu[0] + u, mu[1] + z;
      const double prior = std::exp(-0.5 * (yv - mu).dot(bi * (yv - mu)));
      const double le = std::exp(-0.5 * (e - yv).dot(wi * (e - yv)));
      const double lt = std::exp(-0.5 * (t - yv).dot(wi * (t - yv)));
      joint += le * lt * prior;
      pe += le * prior;
      pt += lt * prior;
    }
  // Unnormalized kernels: the W constants cancel, leaving one prior
  // constant and one cell area.
  const double quad = std::log(joint) - std::log(pe) - std::log(pt) -
                      2 * std::log(h) + std::log(2 * std::numbers::pi) +
                      0.5 * std::log(b.determinant());
  const double err2 = std::abs(m.LogLikelihoodRatio(e, t) - quad);
  out->Require(err2 < 1e-6, "2-D quadrature");

  // Generative recovery.
  Rng rng(21);
  const Vector gmu = RandomVector(rng, 4);
  const Matrix gb = RandomSpd(rng, 4, 0.5), gw = RandomSpd(rng, 4, 0.2);
  RowMatrix x;
  std::vector<int> y;
  SamplePlda(rng, gmu, gb, gw, 200, 10, &x, &y);
  PldaFitResult fit = FitPlda(x, y, 50);
  const double eb = RelFrobenius(fit.model.Between(), gb);
  const double ew = RelFrobenius(fit.model.Within(), gw);
  out->Require(eb < 0.15 && ew < 0.15, "recovery within 15%");
  out->detail << "worst EM step " << worst_step << ", 1-D LLR error " << err1
              << ", 2-D LLR error " << err2 << ", recovery B " << eb << " W "
              << ew;
}

// 6. LDA generalized eigenproblem.
void LdaSuite(Outcome *out) {
  double worst_resid = 0, worst_orth = 0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(600 + seed);
    const int d = 4 + seed % 5, k = 3 + seed % 4;
    RowMatrix x(k * 10, d);
    std::vector<int> y(k * 10);
    std::vector<Vector> centers;
    for (int c = 0; c < k; ++c) centers.push_back(RandomVector(rng, d, 2.0));
    const Matrix mix = RandomMatrix(rng, d, d);
    for (int i = 0; i < k * 10; ++i) {
      y[i] = i % k;
      x.row(i) = (centers[y[i]] + mix * RandomVector(rng, d)).transpose();
    }
    const int out_dim = std::min(d, k - 1);
    LdaModel m = FitLda(x, y, out_dim);
    Scatter sc = ComputeScatter(x, y);
    for (int i = 0; i < out_dim; ++i) {
      const Vector v = m.projection.row(i).transpose();
      worst_resid = std::max(
          worst_resid,
          (sc.between * v - m.eigenvalues[i] * sc.within * v).norm());
    }
    worst_orth = std::max(
        worst_orth, (m.projection * sc.within * m.projection.transpose() -
                     Matrix::Identity(out_dim, out_dim))
                        .cwiseAbs()
                        .maxCoeff());
  }
  out->Require(worst_resid < 1e-8, "residual");
  out->Require(worst_orth < 1e-8, "W-orthonormality");

  Rng rng(11);
  const int d = 5, n0 = 30, n1 = 50, n = n0 + n1;
  const Matrix mix = RandomMatrix(rng, d, d);
  const Vector shift = RandomVector(rng, d, 2.0);
  RowMatrix x(n, d);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i < n0 ? 0 : 1;
    x.row(i) =
        (mix * RandomVector(rng, d) + (y[i] ? shift : Vector::Zero(d)))
            .transpose();
  }
  const Vector m0 = x.topRows(n0).colwise().mean().transpose();
  const Vector m1 = x.bottomRows(n1).colwise().mean().transpose();
  Matrix sw = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Vector r = x.row(i).transpose() - (y[i] ? m1 : m0);
    sw += r * r.transpose();
  }
  sw /= n;
  sw.diagonal().array() += 1e-6 * sw.trace() / d;
  const Vector dir = sw.ldlt().solve(m1 - m0);
  const Vector v = FitLda(x, y, 1).projection.row(0).transpose();
  const double cosine = std::abs(v.dot(dir)) / (v.norm() * dir.norm());
  out->Require(cosine > 0.99, "two-class direction");
  out->detail << "worst residual " << worst_resid << ", worst orthonormality "
              << worst_orth << ", two-class direction cosine " << cosine;
}

// 7. EER against the brute-force sweep.
void EerSuite(Outcome *out) {
  Rng rng(700);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    ScoreSet s;
    const Vector noise = RandomVector(rng, 500);
    const bool ties = k % 2 == 1;
    for (int i = 0; i < 500; ++i) {
      const bool target = i == 0 || (i != 1 && UniformIndex(rng, 3) == 0);
      double v = noise[i] + (target ? 1.5 : 0.0);
      if (ties) v = std::round(4 * v) / 4;
      s.scores.push_back(v);
      s.target.push_back(target);
    }
    worst = std::max(worst, std::abs(ComputeEer(s).eer -
                                     BruteForceEer(s.scores, s.target)));
  }
  const double sep = ComputeEer(ScoreSet{{2, 3, 0, 1}, {true, true, false, false}}).eer;
  const double flat =
      ComputeEer(ScoreSet{{0.5, 0.5, 0.5, 0.5}, {true, false, true, false}}).eer;
  out->Require(worst <= 1e-12, "brute-force agreement");
  out->Require(sep == 0.0, "separable");
  out->Require(flat == 0.5, "all-equal");
  out->detail << "100 sets, worst deviation " << worst << "; separable "
              << sep << "; all-equal " << flat;
}

// 8. AAM with zero margin against softmax over scaled cosines.
void AamReduction(Outcome *out) {
  Rng rng(800);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4, k = 3 + trial % 5, h = 3 + trial % 4;
    RowMatrix emb = RandomMatrix(rng, n, h), w = RandomMatrix(rng, k, h);
    std::vector<int> y = RandomLabels(rng, n, k);
    const AamConfig cfg{4.0 + trial, 0.0};
    AamLossResult r = AamLoss(emb, w, y, cfg);
    RowMatrix xu = emb, wu = w;
    for (int i = 0; i < n; ++i) xu.row(i).normalize();
    for (int i = 0; i < k; ++i) wu.row(i).normalize();
    LossResult ce = SoftmaxCe(cfg.scale * xu * wu.transpose(), y);
    const RowMatrix gc = cfg.scale * ce.grad;
    const RowMatrix gxu = gc * wu, gwu = gc.transpose() * xu;
    double err = std::abs(r.loss - ce.loss);
    for (int i = 0; i < n; ++i) {
      const Vector u = xu.row(i).transpose();
      const Vector g = (Matrix::Identity(h, h) - u * u.transpose()) *
                       gxu.row(i).transpose() / emb.row(i).norm();
      err = std::max(err, (r.d_embeddings.row(i).transpose() - g)
                              .cwiseAbs()
                              .maxCoeff());
    }
    for (int i = 0; i < k; ++i) {
      const Vector u = wu.row(i).transpose();
      const Vector g = (Matrix::Identity(h, h) - u * u.transpose()) *
                       gwu.row(i).transpose() / w.row(i).norm();
      err = std::max(
          err, (r.d_weights.row(i).transpose() - g).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, err);
  }
  out->Require(worst <= 1e-12, "within 1e-12");
  out->detail << "20 instances, worst loss/gradient deviation " << worst;
}

std::string Slurp(const std::filesystem::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream s;
  s << is.rdbuf();
  return s.str();
}

// Runs the file pipeline into dir.
void RunPipeline(const ExperimentConfig &cfg, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  auto p = [&](const char *name) { return (dir / name).string(); };
  CmdSynth(cfg, p("data.csv"));
  CmdSplit(p("data.csv"),
           std::set<std::string>(cfg.split.held_out_domains.begin(),
                                 cfg.split.held_out_domains.end()),
           p("train.csv"), p("eval.csv"));
  ExperimentConfig mct = cfg;
  mct.train.scheme = Scheme::kMct;
  CmdTrain(p("train.csv"), mct, p("mct.json"), p("mct.log"), p("eval.csv"),
           p("mct.probe.csv"));
  CmdTrain(p("train.csv"), cfg, p("maml.json"), p("maml.log"), p("eval.csv"),
           p("maml.probe.csv"));
  CmdTransform(p("maml.json"), p("train.csv"), p("train.maml.csv"));
  CmdFitBackend(p("train.maml.csv"), cfg, p("lda.json"), p("plda.json"));
  CmdMakeTrials(p("eval.csv"), cfg, p("trials.txt"));
  CmdScore(p("eval.csv"), p("trials.txt"), ScoreOptions{}, cfg,
           p("raw.scores"));
  CmdScore(p("eval.csv"), p("trials.txt"),
           ScoreOptions{"cosine", p("mct.json"), "", ""}, cfg,
           p("mct.scores"));
  CmdScore(p("eval.csv"), p("trials.txt"),
           ScoreOptions{"cosine", p("maml.json"), "", ""}, cfg,
           p("maml.scores"));
  CmdScore(p("eval.csv"), p("trials.txt"),
           ScoreOptions{"plda", p("maml.json"), p("lda.json"), p("plda.json")},
           cfg, p("maml.plda.scores"));
  CmdEval({{p("raw.scores"), "cosine", "raw"},
           {p("mct.scores"), "cosine", "mct"},
           {p("maml.scores"), "cosine", "maml"},
           {p("maml.plda.scores"), "plda", "maml+lda"}},
          p("eval.csv"), p("report.csv"));
}

// 9. Byte-identical artifacts across two runs.
void Determinism(const std::filesystem::path &scratch, Outcome *out) {
  ExperimentConfig cfg;
  cfg.synth.n_speakers = 12;
  cfg.synth.utts_per_speaker_domain = 4;
  cfg.net.hidden_dims = {32, 16};
  cfg.train.iterations = 40;
  cfg.train.batch_size = 16;
  cfg.train.eval_every = 20;
  cfg.backend.lda_dim = 8;
  const auto a = scratch / "determinism_a", b = scratch / "determinism_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  RunPipeline(cfg, a);
  RunPipeline(cfg, b);
  int files = 0;
  for (const auto &entry : std::filesystem::directory_iterator(a)) {
    const auto other = b / entry.path().filename();
    out->Require(std::filesystem::exists(other) &&
                     Slurp(entry.path()) == Slurp(other),
                 entry.path().filename().string());
    ++files;
  }
  out->Require(files >= 15, "all artifacts present");
  out->detail << files
              << " artifacts (data, nets, logs, models, trials, scores, "
                 "report) byte-identical across two runs";
}

}  // namespace

int main(int argc, char **argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <experiment-config.json> <scratch-dir>\n";
    return 2;
  }
  ExperimentConfig cfg;
  try {
    cfg = LoadExperimentConfig(argv[1]);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.ExitCode();
  }
  const std::filesystem::path scratch = argv[2];
  std::filesystem::create_directories(scratch);

  struct Criterion {
    int id;
    const char *name;
    Outcome outcome;
  };
  std::vector<Criterion> results(9);
  const char *names[9] = {"gradient suite",     "meta-gradient suite",
                          "held-out ordering",  "final probe",
                          "PLDA",               "LDA",
                          "EER",                "AAM reduction",
                          "determinism"};
  for (int i = 0; i < 9; ++i) {
    results[i].id = i + 1;
    results[i].name = names[i];
  }
  auto guarded = [](Outcome *o, const std::function<void()> &body) {
    try {
      body();
    } catch (const std::exception &e) {
      o->Require(false, std::string("exception: ") + e.what());
    }
  };
  guarded(&results[0].outcome, [&] { GradientSuite(&results[0].outcome); });
  guarded(&results[1].outcome, [&] { MetaGradientSuite(&results[1].outcome); });
  guarded(&results[2].outcome, [&] {
    HeldOutComparison(cfg, &results[2].outcome, &results[3].outcome);
  });
  guarded(&results[4].outcome, [&] { PldaSuite(&results[4].outcome); });
  guarded(&results[5].outcome, [&] { LdaSuite(&results[5].outcome); });
  guarded(&results[6].outcome, [&] { EerSuite(&results[6].outcome); });
  guarded(&results[7].outcome, [&] { AamReduction(&results[7].outcome); });
  guarded(&results[8].outcome,
          [&] { Determinism(scratch, &results[8].outcome); });

  int failed = 0;
  for (const Criterion &c : results) {
    std::cout << "criterion " << c.id << " (" << c.name
              << "): " << (c.outcome.pass ? "PASS" : "FAIL") << ": "
              << c.outcome.detail.str() << "\n";
    failed += !c.outcome.pass;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " FAILED"
                       : std::string("acceptance: all criteria PASS"))
            << std::endl;
  return failed ? 1 : 0;
}
