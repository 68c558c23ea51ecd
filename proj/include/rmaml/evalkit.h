// include/rmaml/evalkit.h

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

#ifndef RMAML_EVALKIT_H_
#define RMAML_EVALKIT_H_

#include <functional>
#include <string>
#include <vector>

#include "rmaml/backend.h"
#include "rmaml/common.h"
#include "rmaml/nncore.h"
#include "rmaml/vecio.h"

namespace rmaml {

struct Trial {
  std::string enroll_utt;
  std::string test_utt;
  bool target = false;

  bool operator==(const Trial &other) const = default;
};

using TrialList = std::vector<Trial>;

/// Trial file: one `enroll_utt test_utt target|nontarget` per line.
TrialList ReadTrials(const std::string &path);
TrialList ReadTrialsFromString(const std::string &text,
                               const std::string &source = "<string>");
void WriteTrials(const TrialList &trials, const std::string &path);
std::string WriteTrialsToString(const TrialList &trials);

/// Every unordered pair of distinct records, labelled by speaker identity.
TrialList MakeAllPairsTrials(const EmbeddingDataset &ds);

/// Samples n_target same-speaker and n_nontarget different-speaker pairs,
/// without self-pairs and without repeating a pair.  Targets come first.
/// Throws DataError when a count cannot be met.
TrialList MakeTrials(const EmbeddingDataset &ds, Rng &rng, long n_target,
                     long n_nontarget);

/// Scores, one per trial, with their labels.
struct ScoreSet {
  std::vector<double> scores;
  std::vector<bool> target;

  std::size_t Size() const { return scores.size(); }
};

/// Maps a raw vector to the space it is scored in.  Stages apply in order.
class Projector {
 public:
  using Stage = std::function<Vector(const Vector &)>;

  Projector() = default;
  Projector &Then(std::string name, Stage stage);
  /// Penultimate-layer embedding of a projection net.
  Projector &ThenNet(const ProjectionNet &net);
  Projector &ThenLda(const LdaModel &lda);

  Vector Apply(const Vector &v) const;
  bool Empty() const { return stages_.empty(); }
  /// Stage names joined with '+', or "raw" when empty.
  std::string Name() const;

 private:
  std::vector<std::pair<std::string, Stage>> stages_;
};

/// Two-vector scoring function (cosine or PLDA LLR).
using PairScorer = std::function<double(const Vector &, const Vector &)>;

PairScorer CosineScorer();
/// Length-normalizes with `pre` and scores with the PLDA LLR.
PairScorer PldaScorer(const Preproc &pre, const PldaModel &plda);

/// Projects every utterance referenced by the trials once, then scores the
/// trials in order.  `threads` > 1 scores disjoint chunks concurrently; the
/// output is identical to the sequential result.
ScoreSet ScoreTrials(const PairScorer &scorer, const Projector &projector,
                     const EmbeddingDataset &ds, const TrialList &trials,
                     int threads = 1);

/// Scores file: `enroll_utt test_utt score target|nontarget` per line.
void WriteScores(const TrialList &trials, const ScoreSet &scores,
                 const std::string &path);
/// Reads a scores file, returning the trials and scores.
ScoreSet ReadScores(const std::string &path, TrialList *trials = nullptr);

struct DetPoint {
  double threshold;  // -inf / +inf at the ends
  double far;        // P(nontarget score >= threshold)
  double frr;        // P(target score < threshold)
};

/// Operating points below all scores, at every midpoint between distinct
/// consecutive scores, and above all scores.  FAR is non-increasing and FRR
/// non-decreasing along the list; the first point is (1, 0) and the last
/// (0, 1).
std::vector<DetPoint> DetPoints(const ScoreSet &scores);

struct EerResult {
  double eer;        // fraction in [0, 1]
  double threshold;
};

/// EER at the FAR/FRR crossing of the DET points: if some point has
/// FAR == FRR that value is returned, otherwise the crossing is linearly
/// interpolated between the last point with FAR > FRR and the next one.
/// Requires at least one target and one nontarget score.
EerResult EerFromDetPoints(const std::vector<DetPoint> &points);
EerResult ComputeEer(const ScoreSet &scores);

/// Row of the EER report CSV `domain,scoring,projector,eer_percent`.
struct EerReportRow {
  std::string domain;
  std::string scoring;
  std::string projector;
  double eer_percent;
};

void WriteEerReport(const std::vector<EerReportRow> &rows,
                    const std::string &path);
std::string EerReportToString(const std::vector<EerReportRow> &rows);

}  // namespace rmaml

#endif  // RMAML_EVALKIT_H_
