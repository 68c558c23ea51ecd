// include/rmaml/vecio.h

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

#ifndef RMAML_VECIO_H_
#define RMAML_VECIO_H_

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "rmaml/common.h"

namespace rmaml {

struct EmbeddingRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::string domain_id;
  Vector vector;

  bool operator==(const EmbeddingRecord &other) const;
};

/// A labelled set of fixed-dimension embedding vectors.  Records keep file
/// order; speaker and domain indices are assigned by first appearance, so
/// everything downstream of a dataset is deterministic.
///
/// Instances are immutable once built; Add() is only used while building.
class EmbeddingDataset {
 public:
  explicit EmbeddingDataset(int dim = 1);

  /// Appends a record, validating dimension, id syntax, uniqueness and
  /// finiteness.  Throws DataError.
  void Add(EmbeddingRecord record);

  int Dim() const { return dim_; }
  std::size_t Size() const { return records_.size(); }
  bool Empty() const { return records_.empty(); }
  const std::vector<EmbeddingRecord> &Records() const { return records_; }
  const EmbeddingRecord &Record(std::size_t i) const { return records_[i]; }

  int NumSpeakers() const { return static_cast<int>(speakers_.size()); }
  int NumDomains() const { return static_cast<int>(domains_.size()); }
  /// Speaker ids in index order.
  const std::vector<std::string> &Speakers() const { return speakers_; }
  const std::vector<std::string> &Domains() const { return domains_; }

  int SpeakerIndex(const std::string &speaker_id) const;
  int DomainIndex(const std::string &domain_id) const;
  /// Class label of record i.
  int Label(std::size_t i) const { return labels_[i]; }

  /// Index of the record with this utterance id, or -1.
  long Find(const std::string &utterance_id) const;

  /// All vectors stacked as rows.
  RowMatrix VectorMatrix() const;

  bool operator==(const EmbeddingDataset &other) const;

 private:
  int dim_;
  std::vector<EmbeddingRecord> records_;
  std::vector<int> labels_;
  std::vector<std::string> speakers_;
  std::vector<std::string> domains_;
  std::unordered_map<std::string, int> speaker_index_;
  std::unordered_map<std::string, int> domain_index_;
  std::unordered_map<std::string, std::size_t> utt_index_;
};

struct DomainSplit {
  EmbeddingDataset train;
  EmbeddingDataset eval;
  std::set<std::string> held_out_domains;
};

/// True if `id` matches [A-Za-z0-9_.-]+.
bool IsValidId(const std::string &id);

/// Reads the CSV interchange format:
///   utterance_id,speaker_id,domain_id,dim=D
///   utt,spk,dom,v0,...,v{D-1}
/// Errors carry the 1-based line number.
EmbeddingDataset ReadDataset(const std::string &path);
EmbeddingDataset ReadDatasetFromString(const std::string &text,
                                       const std::string &source = "<string>");

void WriteDataset(const EmbeddingDataset &ds, const std::string &path);
std::string WriteDatasetToString(const EmbeddingDataset &ds);

/// Splits records by domain, preserving relative order inside each part.
std::map<std::string, EmbeddingDataset> PartitionByDomain(
    const EmbeddingDataset &ds);

/// Holds out the given domains for evaluation.  At least two domains must
/// remain on the training side.
DomainSplit SplitTrainEval(const EmbeddingDataset &ds,
                           const std::set<std::string> &held_out_domains);

}  // namespace rmaml

#endif  // RMAML_VECIO_H_
