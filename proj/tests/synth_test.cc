// tests/synth_test.cc

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

#include "rmaml/synth.h"

using namespace rmaml;

namespace {

double Cosine(const Vector &a, const Vector &b) {
  return a.dot(b) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("no shift and no noise: speakers identical across domains") {
  SynthConfig cfg;
  cfg.noise_std = 0;
  cfg.domain_rotation_strength = 0;
  cfg.domain_bias_scale = 0;
  cfg.n_domains = 2;
  cfg.n_speakers = 5;
  cfg.utts_per_speaker_domain = 3;
  EmbeddingDataset ds = GenerateSsmc(cfg);
  for (const auto &a : ds.Records())
    for (const auto &b : ds.Records())
      if (a.speaker_id == b.speaker_id) CHECK(a.vector == b.vector);
}

TEST_CASE("generation is deterministic in the seed") {
  SynthConfig cfg;
  cfg.n_speakers = 6;
  cfg.utts_per_speaker_domain = 2;
  CHECK(GenerateSsmc(cfg) == GenerateSsmc(cfg));
  SynthConfig other = cfg;
  other.seed = 2;
  CHECK(!(GenerateSsmc(other) == GenerateSsmc(cfg)));
}

TEST_CASE("record count and labels") {
  SynthConfig cfg;
  cfg.n_speakers = 9;
  cfg.n_domains = 3;
  cfg.utts_per_speaker_domain = 4;
  EmbeddingDataset ds = GenerateSsmc(cfg);
  CHECK(ds.Size() == 9 * 3 * 4);
  CHECK(ds.NumSpeakers() == 9);
  CHECK(ds.NumDomains() == 3);
  CHECK(ds.Dim() == 64);
  CHECK(ds.Record(0).domain_id == "dom00");
}

TEST_CASE("domain rotations are orthogonal") {
  SynthConfig cfg;
  cfg.domain_rotation_strength = 1.3;
  for (int d = 0; d < 3; ++d) {
    Matrix q = SynthDomainParams(cfg, d).rotation;
    CHECK((q.transpose() * q - Matrix::Identity(64, 64)).norm() < 1e-10);
    Matrix a = SynthRotationGenerator(cfg, d);
    CHECK((a + a.transpose()).norm() == 0.0);
  }
  Matrix p = SynthLatentBasis(cfg);
  CHECK((p.transpose() * p - Matrix::Identity(16, 16)).norm() < 1e-12);
}

TEST_CASE("default config: cross-domain cosine below same-domain cosine") {
  SynthConfig cfg;
  EmbeddingDataset ds = GenerateSsmc(cfg);
  double same = 0, cross = 0;
  long n_same = 0, n_cross = 0;
  for (std::size_t i = 0; i < ds.Size(); ++i)
    for (std::size_t j = i + 1; j < ds.Size(); ++j) {
      const auto &a = ds.Record(i), &b = ds.Record(j);
      if (a.speaker_id != b.speaker_id) continue;
      const double c = Cosine(a.vector, b.vector);
      if (a.domain_id == b.domain_id) {
        same += c;
        ++n_same;
      } else {
        cross += c;
        ++n_cross;
      }
    }
  MESSAGE("same-domain " << same / n_same << " cross-domain " << cross / n_cross);
  CHECK(cross / n_cross < same / n_same);
}

TEST_CASE("config validation and strict json") {
  SynthConfig cfg;
  cfg.latent_dim = 65;
  CHECK_THROWS_AS(cfg.Check(), ConfigError);
  cfg = SynthConfig();
  cfg.n_speakers = 0;
  CHECK_THROWS_AS(GenerateSsmc(cfg), ConfigError);
  cfg = SynthConfig();
  cfg.noise_std = -1;
  CHECK_THROWS_AS(cfg.Check(), ConfigError);

  nlohmann::json j = SynthConfig();
  SynthConfig back = j.get<SynthConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK_THROWS_AS((nlohmann::json{{"dims", 3}}.get<SynthConfig>()), ConfigError);
  CHECK_THROWS_AS((nlohmann::json{{"dim", "x"}}.get<SynthConfig>()), ConfigError);
}
