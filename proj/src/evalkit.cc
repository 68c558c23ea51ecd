// src/evalkit.cc

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

#include "rmaml/evalkit.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace rmaml {

namespace {

std::string ReadWholeFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

void WriteWholeFile(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw DataError("error writing '" + path + "'");
}

std::vector<std::string> Tokens(const std::string &line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool ParseLabel(const std::string &tok, const std::string &where) {
  if (tok == "target") return true;
  if (tok == "nontarget") return false;
  throw DataError(where + ": unknown label '" + tok +
                  "' (expected target or nontarget)");
}

const char *LabelToken(bool target) {
  return target ? "target" : "nontarget";
}

}  // namespace

TrialList ReadTrialsFromString(const std::string &text,
                               const std::string &source) {
  TrialList out;
  std::istringstream is(text);
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::vector<std::string> tok = Tokens(line);
    if (tok.empty()) continue;
    const std::string where = source + ": line " + std::to_string(line_no);
    if (tok.size() != 3)
      throw DataError(where + ": expected 'enroll_utt test_utt label'");
    out.push_back(Trial{tok[0], tok[1], ParseLabel(tok[2], where)});
  }
  return out;
}

TrialList ReadTrials(const std::string &path) {
  return ReadTrialsFromString(ReadWholeFile(path), path);
}

std::string WriteTrialsToString(const TrialList &trials) {
  std::string out;
  for (const Trial &t : trials) {
    out += t.enroll_utt;
    out += ' ';
    out += t.test_utt;
    out += ' ';
    out += LabelToken(t.target);
    out += '\n';
  }
  return out;
}

void WriteTrials(const TrialList &trials, const std::string &path) {
  WriteWholeFile(path, WriteTrialsToString(trials));
}

TrialList MakeAllPairsTrials(const EmbeddingDataset &ds) {
  TrialList out;
  for (std::size_t i = 0; i < ds.Size(); ++i)
    for (std::size_t j = i + 1; j < ds.Size(); ++j)
      out.push_back(Trial{ds.Record(i).utterance_id, ds.Record(j).utterance_id,
                          ds.Label(i) == ds.Label(j)});
  return out;
}

TrialList MakeTrials(const EmbeddingDataset &ds, Rng &rng, long n_target,
                     long n_nontarget) {
  if (n_target < 0 || n_nontarget < 0)
    throw ConfigError("trial counts must be >= 0");
  const std::size_t n = ds.Size();
  using Pair = std::pair<std::size_t, std::size_t>;

  // Target pairs are enumerated per speaker, then a prefix of a shuffle is
  // kept.
  std::vector<std::vector<std::size_t>> by_speaker(ds.NumSpeakers());
  for (std::size_t i = 0; i < n; ++i) by_speaker[ds.Label(i)].push_back(i);
  std::vector<Pair> targets;
  for (const auto &members : by_speaker)
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        targets.emplace_back(members[a], members[b]);
  if (static_cast<std::size_t>(n_target) > targets.size())
    throw DataError("requested " + std::to_string(n_target) +
                    " target trials but only " +
                    std::to_string(targets.size()) + " exist");
  for (long i = 0; i < n_target; ++i) {
    std::size_t j = i + UniformIndex(rng, targets.size() - i);
    std::swap(targets[i], targets[j]);
  }

  const double total_pairs = 0.5 * static_cast<double>(n) * (n > 0 ? n - 1 : 0);
  const double available = total_pairs - static_cast<double>(targets.size());
  if (static_cast<double>(n_nontarget) > available)
    throw DataError("requested " + std::to_string(n_nontarget) +
                    " nontarget trials but only " +
                    std::to_string(static_cast<long>(available)) + " exist");
  std::vector<Pair> nontargets;
  if (2.0 * n_nontarget > available) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (ds.Label(i) != ds.Label(j)) nontargets.emplace_back(i, j);
    for (long i = 0; i < n_nontarget; ++i) {
      std::size_t j = i + UniformIndex(rng, nontargets.size() - i);
      std::swap(nontargets[i], nontargets[j]);
    }
    nontargets.resize(n_nontarget);
  } else {
    std::unordered_set<std::uint64_t> used;
    while (static_cast<long>(nontargets.size()) < n_nontarget) {
      std::size_t a = UniformIndex(rng, n), b = UniformIndex(rng, n);
      if (a == b || ds.Label(a) == ds.Label(b)) continue;
      if (a > b) std::swap(a, b);
      if (!used.insert(static_cast<std::uint64_t>(a) * n + b).second) continue;
      nontargets.emplace_back(a, b);
    }
  }

  TrialList out;
  out.reserve(n_target + n_nontarget);
  for (long i = 0; i < n_target; ++i)
    out.push_back(Trial{ds.Record(targets[i].first).utterance_id,
                        ds.Record(targets[i].second).utterance_id, true});
  for (const Pair &p : nontargets)
    out.push_back(Trial{ds.Record(p.first).utterance_id,
                        ds.Record(p.second).utterance_id, false});
  return out;
}

Projector &Projector::Then(std::string name, Stage stage) {
  stages_.emplace_back(std::move(name), std::move(stage));
  return *this;
}

Projector &Projector::ThenNet(const ProjectionNet &net) {
  return Then("net", [net](const Vector &v) { return Embed(net, v); });
}

Projector &Projector::ThenLda(const LdaModel &lda) {
  return Then("lda", [lda](const Vector &v) { return ApplyLda(lda, v); });
}

Vector Projector::Apply(const Vector &v) const {
  Vector out = v;
  for (const auto &stage : stages_) out = stage.second(out);
  return out;
}

std::string Projector::Name() const {
  if (stages_.empty()) return "raw";
  std::string out;
  for (const auto &stage : stages_) {
    if (!out.empty()) out += '+';
    out += stage.first;
  }
  return out;
}

PairScorer CosineScorer() { return ScoreCosine; }

PairScorer PldaScorer(const Preproc &pre, const PldaModel &plda) {
  return [pre, plda](const Vector &e, const Vector &t) {
    return plda.LogLikelihoodRatio(ApplyPreproc(pre, e), ApplyPreproc(pre, t));
  };
}

namespace {

// Runs body(begin, end) over [0, n) split into `threads` contiguous chunks.
template <typename Body>
void ParallelChunks(std::size_t n, int threads, Body body) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk, end = std::min(n, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        if (begin < end) body(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto &th : pool) th.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

ScoreSet ScoreTrials(const PairScorer &scorer, const Projector &projector,
                     const EmbeddingDataset &ds, const TrialList &trials,
                     int threads) {
  // Resolve ids and collect the distinct records to project.
  std::vector<std::size_t> enroll(trials.size()), test(trials.size());
  std::unordered_map<std::size_t, std::size_t> slot;
  std::vector<std::size_t> records;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial &t = trials[i];
    for (auto [id, dst] : {std::pair{&t.enroll_utt, &enroll[i]},
                           std::pair{&t.test_utt, &test[i]}}) {
      const long r = ds.Find(*id);
      if (r < 0)
        throw DataError("trial " + std::to_string(i + 1) + " (" +
                        t.enroll_utt + " " + t.test_utt +
                        "): unknown utterance '" + *id + "'");
      auto it = slot.find(r);
      if (it == slot.end()) {
        it = slot.emplace(r, records.size()).first;
        records.push_back(r);
      }
      *dst = it->second;
    }
  }
  std::vector<Vector> projected(records.size());
  ParallelChunks(records.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      projected[i] = projector.Apply(ds.Record(records[i]).vector);
  });
  ScoreSet out;
  out.scores.resize(trials.size());
  out.target.resize(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i)
    out.target[i] = trials[i].target;
  ParallelChunks(trials.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double s = scorer(projected[enroll[i]], projected[test[i]]);
      if (!std::isfinite(s))
        throw NumericError("non-finite score for trial " + std::to_string(i + 1));
      out.scores[i] = s;
    }
  });
  return out;
}

void WriteScores(const TrialList &trials, const ScoreSet &scores,
                 const std::string &path) {
  if (trials.size() != scores.Size())
    throw DataError("score count does not match trial count");
  std::string out;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    out += trials[i].enroll_utt + ' ' + trials[i].test_utt + ' ' +
           FormatDouble(scores.scores[i]) + ' ' + LabelToken(scores.target[i]) +
           '\n';
  }
  WriteWholeFile(path, out);
}

ScoreSet ReadScores(const std::string &path, TrialList *trials) {
  std::istringstream is(ReadWholeFile(path));
  ScoreSet out;
  if (trials) trials->clear();
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::vector<std::string> tok = Tokens(line);
    if (tok.empty()) continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    if (tok.size() != 4)
      throw DataError(where + ": expected 'enroll_utt test_utt score label'");
    const double s = ParseDouble(tok[2], where);
    if (!std::isfinite(s)) throw DataError(where + ": non-finite score");
    const bool target = ParseLabel(tok[3], where);
    out.scores.push_back(s);
    out.target.push_back(target);
    if (trials) trials->push_back(Trial{tok[0], tok[1], target});
  }
  return out;
}

std::vector<DetPoint> DetPoints(const ScoreSet &scores) {
  const std::size_t n = scores.Size();
  if (scores.target.size() != n) throw DataError("score/label size mismatch");
  long n_tar = 0, n_non = 0;
  for (bool t : scores.target) (t ? n_tar : n_non) += 1;
  if (n_tar == 0 || n_non == 0)
    throw DataError("EER needs at least one target and one nontarget score");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores.scores[a] < scores.scores[b];
  });

  std::vector<DetPoint> points;
  long non_accepted = n_non, tar_rejected = 0;
  const double dn = static_cast<double>(n_non), dt = static_cast<double>(n_tar);
  points.push_back({-INFINITY, non_accepted / dn, tar_rejected / dt});
  std::size_t i = 0;
  while (i < n) {
    const double value = scores.scores[order[i]];
    while (i < n && scores.scores[order[i]] == value) {
      if (scores.target[order[i]])
        ++tar_rejected;
      else
        --non_accepted;
      ++i;
    }
    const double threshold =
        i < n ? 0.5 * (value + scores.scores[order[i]]) : INFINITY;
    points.push_back({threshold, non_accepted / dn, tar_rejected / dt});
  }
  return points;
}

namespace {

EerResult Crossing(const std::vector<DetPoint> &p, double lo, double hi) {
  auto finite = [&](double th) {
    if (th == -INFINITY) return lo;
    if (th == INFINITY) return hi;
    return th;
  };
  for (std::size_t j = 0; j + 1 < p.size(); ++j) {
    const double d0 = p[j].far - p[j].frr, d1 = p[j + 1].far - p[j + 1].frr;
    if (d0 == 0.0) return {p[j].far, finite(p[j].threshold)};
    if (d0 > 0.0 && d1 <= 0.0) {
      if (d1 == 0.0) return {p[j + 1].far, finite(p[j + 1].threshold)};
      const double lambda = d0 / (d0 - d1);
      const double t0 = finite(p[j].threshold), t1 = finite(p[j + 1].threshold);
      return {p[j].far + lambda * (p[j + 1].far - p[j].far),
              t0 + lambda * (t1 - t0)};
    }
  }
  return {p.back().far, finite(p.back().threshold)};
}

}  // namespace

EerResult EerFromDetPoints(const std::vector<DetPoint> &points) {
  if (points.size() < 2) throw DataError("need at least two DET points");
  double lo = 0.0, hi = 0.0;
  for (const DetPoint &p : points)
    if (std::isfinite(p.threshold)) {
      hi = p.threshold;
      if (lo == 0.0 && hi == p.threshold) lo = p.threshold;
    }
  for (const DetPoint &p : points)
    if (std::isfinite(p.threshold)) {
      lo = p.threshold;
      break;
    }
  return Crossing(points, lo, hi);
}

EerResult ComputeEer(const ScoreSet &scores) {
  std::vector<DetPoint> points = DetPoints(scores);
  const auto [lo, hi] =
      std::minmax_element(scores.scores.begin(), scores.scores.end());
  return Crossing(points, *lo, *hi);
}

std::string EerReportToString(const std::vector<EerReportRow> &rows) {
  std::string out = "domain,scoring,projector,eer_percent\n";
  char buf[64];
  for (const EerReportRow &r : rows) {
    std::snprintf(buf, sizeof(buf), "%.4f", r.eer_percent);
    out += r.domain + ',' + r.scoring + ',' + r.projector + ',' + buf + '\n';
  }
  return out;
}

void WriteEerReport(const std::vector<EerReportRow> &rows,
                    const std::string &path) {
  WriteWholeFile(path, EerReportToString(rows));
}

}  // namespace rmaml
