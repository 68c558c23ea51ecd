// src/backend.cc

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

#include "rmaml/backend.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

namespace rmaml {

namespace {

int NumClasses(std::span<const int> labels) {
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw DataError("negative class label");
    k = std::max(k, l + 1);
  }
  return k;
}

void CheckLabels(const RowMatrix &x, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw DataError("label count does not match the number of vectors");
  if (x.rows() == 0) throw DataError("empty dataset");
}

Matrix Symmetrize(const Matrix &m) { return 0.5 * (m + m.transpose()); }

// Log-determinant of a symmetric positive definite matrix.
double LogDetSpd(const Matrix &m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericError("covariance is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Clamps eigenvalues of a symmetric matrix from below.
Matrix FloorEigenvalues(const Matrix &m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(m));
  Vector ev = es.eigenvalues().cwiseMax(floor);
  return Symmetrize(es.eigenvectors() * ev.asDiagonal() *
                    es.eigenvectors().transpose());
}

struct SpeakerStats {
  std::vector<int> count;
  std::vector<Vector> mean;
  std::vector<Matrix> scatter;  // around the speaker mean
};

SpeakerStats ComputeSpeakerStats(const RowMatrix &x,
                                 std::span<const int> labels) {
  const int k = NumClasses(labels);
  const Eigen::Index d = x.cols();
  SpeakerStats s;
  s.count.assign(k, 0);
  s.mean.assign(k, Vector::Zero(d));
  s.scatter.assign(k, Matrix::Zero(d, d));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    s.count[labels[i]] += 1;
    s.mean[labels[i]] += x.row(i).transpose();
  }
  for (int c = 0; c < k; ++c)
    if (s.count[c] > 0) s.mean[c] /= s.count[c];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Vector r = x.row(i).transpose() - s.mean[labels[i]];
    s.scatter[labels[i]] += r * r.transpose();
  }
  return s;
}

}  // namespace

Preproc FitPreproc(const RowMatrix &x, bool length_norm) {
  if (x.rows() == 0) throw DataError("cannot fit preprocessing on no data");
  return Preproc{x.colwise().mean().transpose(), length_norm};
}

Vector ApplyPreproc(const Preproc &p, const Vector &v) {
  if (v.size() != p.mean.size())
    throw DataError("preprocessing dimension mismatch");
  Vector out = v - p.mean;
  if (p.length_norm) {
    const double n = out.norm();
    if (!(n > 0.0))
      throw DataError("cannot length-normalize a zero vector");
    out *= std::sqrt(static_cast<double>(out.size())) / n;
  }
  return out;
}

Scatter ComputeScatter(const RowMatrix &x, std::span<const int> labels) {
  CheckLabels(x, labels);
  SpeakerStats s = ComputeSpeakerStats(x, labels);
  const Eigen::Index d = x.cols();
  const double n = static_cast<double>(x.rows());
  Scatter out;
  out.mean = x.colwise().mean().transpose();
  out.within = Matrix::Zero(d, d);
  out.between = Matrix::Zero(d, d);
  for (std::size_t c = 0; c < s.count.size(); ++c) {
    if (s.count[c] == 0) continue;
    out.within += s.scatter[c];
    Vector dm = s.mean[c] - out.mean;
    out.between += s.count[c] * dm * dm.transpose();
  }
  out.within /= n;
  out.between /= n;
  const double tr = out.within.trace();
  if (!(tr > 0.0)) throw DataError("degenerate within-class scatter");
  out.within.diagonal().array() += 1e-6 * tr / d;
  return out;
}

LdaModel FitLda(const RowMatrix &x, std::span<const int> labels, int out_dim) {
  CheckLabels(x, labels);
  const int k = NumClasses(labels);
  if (k < 2) throw DataError("LDA needs at least two classes");
  const int max_dim = std::min<int>(x.cols(), k - 1);
  if (out_dim < 1 || out_dim > max_dim)
    throw ConfigError("LDA dimension " + std::to_string(out_dim) +
                      " must be in [1, " + std::to_string(max_dim) + "]");
  Scatter sc = ComputeScatter(x, labels);
  // Solves between * v = lambda * within * v with v^T within v = 1.
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(
      Symmetrize(sc.between), Symmetrize(sc.within),
      Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw NumericError("generalized eigenproblem failed");
  const Eigen::Index d = x.cols();
  LdaModel m;
  m.mean = sc.mean;
  m.projection.resize(out_dim, d);
  m.eigenvalues.resize(out_dim);
  for (int i = 0; i < out_dim; ++i) {
    const Eigen::Index src = d - 1 - i;
    Vector v = ges.eigenvectors().col(src);
    Eigen::Index big;
    v.cwiseAbs().maxCoeff(&big);
    if (v[big] < 0) v = -v;
    m.projection.row(i) = v.transpose();
    m.eigenvalues[i] = ges.eigenvalues()[src];
  }
  return m;
}

Vector ApplyLda(const LdaModel &m, const Vector &v) {
  if (v.size() != m.mean.size()) throw DataError("LDA dimension mismatch");
  return m.projection * (v - m.mean);
}

PldaModel::PldaModel(Vector mu, Matrix between, Matrix within)
    : mu_(std::move(mu)), between_(std::move(between)),
      within_(std::move(within)) {
  const Eigen::Index d = mu_.size();
  if (between_.rows() != d || between_.cols() != d || within_.rows() != d ||
      within_.cols() != d)
    throw DataError("PLDA parameter shapes do not match");
  const Matrix total = between_ + within_;
  Matrix joint(2 * d, 2 * d);
  joint << total, between_, between_, total;
  Eigen::LDLT<Matrix> joint_ldlt(joint);
  const Matrix joint_inv = joint_ldlt.solve(Matrix::Identity(2 * d, 2 * d));
  Eigen::LDLT<Matrix> total_ldlt(total);
  const Matrix total_inv = total_ldlt.solve(Matrix::Identity(d, d));
  quad_ = Symmetrize(total_inv - joint_inv.topLeftCorner(d, d));
  cross_ = -Symmetrize(joint_inv.topRightCorner(d, d));
  offset_ = -0.5 * LogDetSpd(Symmetrize(joint)) + LogDetSpd(Symmetrize(total));
}

double PldaModel::LogLikelihoodRatio(const Vector &enroll,
                                     const Vector &test) const {
  if (enroll.size() != Dim() || test.size() != Dim())
    throw DataError("PLDA scoring dimension mismatch");
  const Vector e = enroll - mu_, t = test - mu_;
  return 0.5 * e.dot(quad_ * e) + 0.5 * t.dot(quad_ * t) + e.dot(cross_ * t) +
         offset_;
}

double PldaLogLikelihood(const PldaModel &m, const RowMatrix &x,
                         std::span<const int> labels) {
  CheckLabels(x, labels);
  SpeakerStats s = ComputeSpeakerStats(x, labels);
  const double d = static_cast<double>(x.cols());
  const double log2pi = std::log(2.0 * std::numbers::pi);
  Eigen::LLT<Matrix> w_llt(m.Within());
  if (w_llt.info() != Eigen::Success)
    throw NumericError("within-speaker covariance is not positive definite");
  const double logdet_w = LogDetSpd(m.Within());
  double ll = 0.0;
  for (std::size_t c = 0; c < s.count.size(); ++c) {
    const int n = s.count[c];
    if (n == 0) continue;
    // Utterances given the speaker mean contribute a within-speaker term;
    // the speaker average is N(mu, B + W / n).
    const Matrix w_inv_s = w_llt.solve(s.scatter[c]);
    ll += -0.5 * (n - 1) * d * log2pi - 0.5 * (n - 1) * logdet_w -
          0.5 * d * std::log(static_cast<double>(n)) - 0.5 * w_inv_s.trace();
    const Matrix cov = m.Between() + m.Within() / n;
    Eigen::LLT<Matrix> llt(cov);
    const Vector r = s.mean[c] - m.Mean();
    ll += -0.5 * r.dot(llt.solve(r)) - 0.5 * LogDetSpd(cov) - 0.5 * d * log2pi;
  }
  return ll;
}

PldaFitResult FitPlda(const RowMatrix &x, std::span<const int> labels,
                      int n_iters) {
  CheckLabels(x, labels);
  if (n_iters < 0) throw ConfigError("PLDA iteration count must be >= 0");
  SpeakerStats s = ComputeSpeakerStats(x, labels);
  int multi = 0, speakers = 0;
  for (int n : s.count) {
    if (n > 0) ++speakers;
    if (n >= 2) ++multi;
  }
  if (multi < 2)
    throw DataError(
        "PLDA needs at least two speakers with two or more utterances");
  const Eigen::Index d = x.cols();
  const double n_total = static_cast<double>(x.rows());

  Vector mu = x.colwise().mean().transpose();
  Matrix within = Matrix::Zero(d, d), between = Matrix::Zero(d, d);
  for (std::size_t c = 0; c < s.count.size(); ++c) {
    if (s.count[c] == 0) continue;
    within += s.scatter[c];
    Vector r = s.mean[c] - mu;
    between += r * r.transpose();
  }
  within /= n_total;
  between /= speakers;

  auto floor_within = [&](const Matrix &w) {
    const double tr = w.trace();
    if (!std::isfinite(tr) || !(tr > 0.0))
      throw NumericError("singular within-speaker covariance");
    return FloorEigenvalues(w, std::max(1e-10, 1e-10 * tr / d));
  };
  within = floor_within(within);
  between = FloorEigenvalues(between, 0.0);

  PldaFitResult out;
  out.model = PldaModel(mu, between, within);
  out.log_likelihoods.push_back(PldaLogLikelihood(out.model, x, labels));
  for (int it = 0; it < n_iters; ++it) {
    // E-step: posterior of each speaker mean,
    //   C = B - B (B + W/n)^-1 B,  y = mu + B (B + W/n)^-1 (xbar - mu),
    // which stays valid for singular B.
    std::vector<Vector> post_mean(s.count.size());
    std::vector<Matrix> post_cov(s.count.size());
    for (std::size_t c = 0; c < s.count.size(); ++c) {
      const int n = s.count[c];
      if (n == 0) continue;
      Eigen::LDLT<Matrix> ldlt(between + within / n);
      const Matrix gain = ldlt.solve(between).transpose();  // B (B+W/n)^-1
      post_mean[c] = mu + gain * (s.mean[c] - mu);
      post_cov[c] = Symmetrize(between - gain * between);
    }
    // M-step.
    Vector new_mu = Vector::Zero(d);
    for (std::size_t c = 0; c < s.count.size(); ++c)
      if (s.count[c] > 0) new_mu += post_mean[c];
    new_mu /= speakers;
    Matrix new_b = Matrix::Zero(d, d), new_w = Matrix::Zero(d, d);
    for (std::size_t c = 0; c < s.count.size(); ++c) {
      const int n = s.count[c];
      if (n == 0) continue;
      Vector r = post_mean[c] - new_mu;
      new_b += post_cov[c] + r * r.transpose();
      Vector e = s.mean[c] - post_mean[c];
      new_w += s.scatter[c] + n * (e * e.transpose() + post_cov[c]);
    }
    mu = new_mu;
    between = FloorEigenvalues(new_b / speakers, 0.0);
    within = floor_within(new_w / n_total);
    if (!mu.allFinite() || !between.allFinite() || !within.allFinite())
      throw NumericError("PLDA EM produced non-finite parameters");
    out.model = PldaModel(mu, between, within);
    out.log_likelihoods.push_back(PldaLogLikelihood(out.model, x, labels));
  }
  return out;
}

double ScorePlda(const PldaModel &m, const Vector &enroll, const Vector &test) {
  return m.LogLikelihoodRatio(enroll, test);
}

double ScoreCosine(const Vector &a, const Vector &b) {
  if (a.size() != b.size()) throw DataError("cosine: dimension mismatch");
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0))
    throw DataError("cosine: zero vector");
  return a.dot(b) / (na * nb);
}

void BackendConfig::Check() const {
  if (lda_dim < 1) throw ConfigError("backend.lda_dim must be >= 1");
  if (plda_iters < 0) throw ConfigError("backend.plda_iters must be >= 0");
}

void to_json(Json &j, const BackendConfig &c) {
  j = Json{{"lda_dim", c.lda_dim},
           {"plda_iters", c.plda_iters},
           {"length_norm", c.length_norm}};
}

void from_json(const Json &j, BackendConfig &c) {
  CheckKeys(j, {"lda_dim", "plda_iters", "length_norm"}, "backend");
  ReadKey(j, "lda_dim", &c.lda_dim, "backend");
  ReadKey(j, "plda_iters", &c.plda_iters, "backend");
  ReadKey(j, "length_norm", &c.length_norm, "backend");
  c.Check();
}

Backend FitBackend(const EmbeddingDataset &ds, const BackendConfig &cfg) {
  cfg.Check();
  RowMatrix x = ds.VectorMatrix();
  std::vector<int> labels(ds.Size());
  for (std::size_t i = 0; i < ds.Size(); ++i) labels[i] = ds.Label(i);
  int dim = cfg.lda_dim;
  const int max_dim = std::min(ds.Dim(), ds.NumSpeakers() - 1);
  if (dim > max_dim) {
    std::cerr << "warning: LDA dimension " << dim << " clamped to " << max_dim
              << " (" << ds.NumSpeakers() << " speakers, dimension "
              << ds.Dim() << ")\n";
    dim = max_dim;
  }
  Backend b;
  b.lda = FitLda(x, labels, dim);
  RowMatrix y(x.rows(), dim);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    y.row(i) = ApplyLda(b.lda, x.row(i).transpose()).transpose();
  b.plda_preproc = FitPreproc(y, cfg.length_norm);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    y.row(i) = ApplyPreproc(b.plda_preproc, y.row(i).transpose()).transpose();
  PldaFitResult fit = FitPlda(y, labels, cfg.plda_iters);
  b.plda = fit.model;
  b.plda_log_likelihoods = fit.log_likelihoods;
  return b;
}

Json LdaToJson(const LdaModel &m) {
  return Json{{"mean", VectorToJson(m.mean)},
              {"projection", MatrixToJson(m.projection)},
              {"eigenvalues", VectorToJson(m.eigenvalues)}};
}

LdaModel LdaFromJson(const Json &j) {
  CheckKeys(j, {"mean", "projection", "eigenvalues"}, "lda model");
  LdaModel m;
  try {
    m.mean = VectorFromJson(j.at("mean"), "lda mean");
    m.projection = MatrixFromJson(j.at("projection"), "lda projection");
    m.eigenvalues = VectorFromJson(j.at("eigenvalues"), "lda eigenvalues");
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("lda model: ") + e.what());
  }
  if (m.projection.cols() != m.mean.size() ||
      m.eigenvalues.size() != m.projection.rows())
    throw DataError("lda model: inconsistent shapes");
  return m;
}

Json PldaToJson(const Preproc &pre, const PldaModel &m) {
  return Json{{"preproc",
               Json{{"mean", VectorToJson(pre.mean)},
                    {"length_norm", pre.length_norm}}},
              {"mu", VectorToJson(m.Mean())},
              {"between", MatrixToJson(m.Between())},
              {"within", MatrixToJson(m.Within())}};
}

PldaModel PldaFromJson(const Json &j, Preproc *pre) {
  CheckKeys(j, {"preproc", "mu", "between", "within"}, "plda model");
  try {
    if (pre) {
      const Json &p = j.at("preproc");
      CheckKeys(p, {"mean", "length_norm"}, "plda model preproc");
      pre->mean = VectorFromJson(p.at("mean"), "preproc mean");
      pre->length_norm = p.at("length_norm").get<bool>();
    }
    return PldaModel(VectorFromJson(j.at("mu"), "plda mu"),
                     MatrixFromJson(j.at("between"), "plda between"),
                     MatrixFromJson(j.at("within"), "plda within"));
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("plda model: ") + e.what());
  }
}

}  // namespace rmaml
