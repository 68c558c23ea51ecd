// src/vecio.cc

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

#include "rmaml/vecio.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace rmaml {

bool EmbeddingRecord::operator==(const EmbeddingRecord &other) const {
  return utterance_id == other.utterance_id &&
         speaker_id == other.speaker_id && domain_id == other.domain_id &&
         vector.size() == other.vector.size() && vector == other.vector;
}

EmbeddingDataset::EmbeddingDataset(int dim) : dim_(dim) {
  if (dim < 1) throw DataError("dataset dimension must be >= 1");
}

bool IsValidId(const std::string &id) {
  if (id.empty()) return false;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void EmbeddingDataset::Add(EmbeddingRecord record) {
  if (record.vector.size() != dim_)
    throw DataError("record '" + record.utterance_id + "' has dimension " +
                    std::to_string(record.vector.size()) + ", expected " +
                    std::to_string(dim_));
  for (const std::string *id :
       {&record.utterance_id, &record.speaker_id, &record.domain_id})
    if (!IsValidId(*id)) throw DataError("invalid identifier '" + *id + "'");
  if (!record.vector.allFinite())
    throw DataError("record '" + record.utterance_id +
                    "' contains a non-finite value");
  if (utt_index_.count(record.utterance_id))
    throw DataError("duplicate utterance_id '" + record.utterance_id + "'");

  auto spk = speaker_index_.find(record.speaker_id);
  int label;
  if (spk == speaker_index_.end()) {
    label = static_cast<int>(speakers_.size());
    speaker_index_.emplace(record.speaker_id, label);
    speakers_.push_back(record.speaker_id);
  } else {
    label = spk->second;
  }
  if (!domain_index_.count(record.domain_id)) {
    domain_index_.emplace(record.domain_id,
                          static_cast<int>(domains_.size()));
    domains_.push_back(record.domain_id);
  }
  utt_index_.emplace(record.utterance_id, records_.size());
  labels_.push_back(label);
  records_.push_back(std::move(record));
}

int EmbeddingDataset::SpeakerIndex(const std::string &speaker_id) const {
  auto it = speaker_index_.find(speaker_id);
  return it == speaker_index_.end() ? -1 : it->second;
}

int EmbeddingDataset::DomainIndex(const std::string &domain_id) const {
  auto it = domain_index_.find(domain_id);
  return it == domain_index_.end() ? -1 : it->second;
}

long EmbeddingDataset::Find(const std::string &utterance_id) const {
  auto it = utt_index_.find(utterance_id);
  return it == utt_index_.end() ? -1 : static_cast<long>(it->second);
}

RowMatrix EmbeddingDataset::VectorMatrix() const {
  RowMatrix m(records_.size(), dim_);
  for (std::size_t i = 0; i < records_.size(); ++i)
    m.row(i) = records_[i].vector.transpose();
  return m;
}

bool EmbeddingDataset::operator==(const EmbeddingDataset &other) const {
  return dim_ == other.dim_ && records_ == other.records_;
}

EmbeddingDataset ReadDatasetFromString(const std::string &text,
                                       const std::string &source) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw DataError(source + ": missing header line");
  std::vector<std::string> header = SplitString(line, ',');
  if (header.size() != 4 || header[0] != "utterance_id" ||
      header[1] != "speaker_id" || header[2] != "domain_id" ||
      header[3].rfind("dim=", 0) != 0)
    throw DataError(source +
                    ": line 1: expected header "
                    "'utterance_id,speaker_id,domain_id,dim=D'");
  int dim = 0;
  try {
    std::size_t used = 0;
    dim = std::stoi(header[3].substr(4), &used);
    if (used != header[3].size() - 4) dim = 0;
  } catch (const std::exception &) {
    dim = 0;
  }
  if (dim < 1) throw DataError(source + ": line 1: invalid dimension");

  EmbeddingDataset ds(dim);
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() && is.peek() == EOF) break;
    const std::string where = source + ": line " + std::to_string(line_no);
    std::vector<std::string> fields = SplitString(line, ',');
    if (fields.size() < 4)
      throw DataError(where + ": too few fields");
    if (static_cast<long>(fields.size()) - 3 != dim)
      throw DataError(where + ": dimension mismatch, got " +
                      std::to_string(fields.size() - 3) + " values, expected " +
                      std::to_string(dim));
    EmbeddingRecord rec;
    rec.utterance_id = fields[0];
    rec.speaker_id = fields[1];
    rec.domain_id = fields[2];
    rec.vector.resize(dim);
    for (int d = 0; d < dim; ++d) {
      rec.vector[d] = ParseDouble(fields[3 + d], where);
      if (!std::isfinite(rec.vector[d]))
        throw DataError(where + ": non-finite value");
    }
    try {
      ds.Add(std::move(rec));
    } catch (const DataError &e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return ds;
}

EmbeddingDataset ReadDataset(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << is.rdbuf();
  return ReadDatasetFromString(buf.str(), path);
}

std::string WriteDatasetToString(const EmbeddingDataset &ds) {
  std::string out = "utterance_id,speaker_id,domain_id,dim=" +
                    std::to_string(ds.Dim()) + "\n";
  for (const EmbeddingRecord &r : ds.Records()) {
    out += r.utterance_id;
    out += ',';
    out += r.speaker_id;
    out += ',';
    out += r.domain_id;
    for (Eigen::Index d = 0; d < r.vector.size(); ++d) {
      out += ',';
      out += FormatDouble(r.vector[d]);
    }
    out += '\n';
  }
  return out;
}

void WriteDataset(const EmbeddingDataset &ds, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  os << WriteDatasetToString(ds);
  if (!os) throw DataError("error writing '" + path + "'");
}

std::map<std::string, EmbeddingDataset> PartitionByDomain(
    const EmbeddingDataset &ds) {
  std::map<std::string, EmbeddingDataset> parts;
  for (const EmbeddingRecord &r : ds.Records()) {
    auto it = parts.find(r.domain_id);
    if (it == parts.end())
      it = parts.emplace(r.domain_id, EmbeddingDataset(ds.Dim())).first;
    it->second.Add(r);
  }
  return parts;
}

DomainSplit SplitTrainEval(const EmbeddingDataset &ds,
                           const std::set<std::string> &held_out_domains) {
  for (const std::string &d : held_out_domains)
    if (ds.DomainIndex(d) < 0)
      throw ConfigError("unknown held-out domain '" + d + "'");
  int remaining = ds.NumDomains() - static_cast<int>(held_out_domains.size());
  if (remaining < 2)
    throw ConfigError("holding out " +
                      std::to_string(held_out_domains.size()) + " of " +
                      std::to_string(ds.NumDomains()) +
                      " domains leaves fewer than 2 training domains");
  DomainSplit split{EmbeddingDataset(ds.Dim()), EmbeddingDataset(ds.Dim()),
                    held_out_domains};
  for (const EmbeddingRecord &r : ds.Records()) {
    if (held_out_domains.count(r.domain_id))
      split.eval.Add(r);
    else
      split.train.Add(r);
  }
  return split;
}

}  // namespace rmaml
