// src/synth.cc

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

#include "rmaml/synth.h"

#include <cmath>
#include <cstdio>

#include <unsupported/Eigen/MatrixFunctions>

#include "rmaml/json_util.h"

namespace rmaml {

namespace {

// Stream tags; each kind of random quantity gets its own family of streams.
enum : std::uint64_t {
  kTagBasis = 1,
  kTagSpeaker = 2,
  kTagRotation = 3,
  kTagBias = 4,
  kTagNoise = 5,
};

}  // namespace

void SynthConfig::Check() const {
  if (dim < 1) throw ConfigError("synth.dim must be >= 1");
  if (latent_dim < 1 || latent_dim > dim)
    throw ConfigError("synth.latent_dim must be in [1, dim]");
  if (n_speakers < 1 || n_domains < 1 || utts_per_speaker_domain < 1)
    throw ConfigError("synth counts must be >= 1");
  if (!(domain_rotation_strength >= 0.0) || !(domain_bias_scale >= 0.0) ||
      !(noise_std >= 0.0))
    throw ConfigError("synth shift and noise parameters must be >= 0");
}

void to_json(nlohmann::json &j, const SynthConfig &c) {
  j = nlohmann::json{
      {"dim", c.dim},
      {"latent_dim", c.latent_dim},
      {"n_speakers", c.n_speakers},
      {"n_domains", c.n_domains},
      {"utts_per_speaker_domain", c.utts_per_speaker_domain},
      {"domain_rotation_strength", c.domain_rotation_strength},
      {"domain_bias_scale", c.domain_bias_scale},
      {"noise_std", c.noise_std},
      {"seed", c.seed},
  };
}

void from_json(const nlohmann::json &j, SynthConfig &c) {
  const std::string s = "synth";
  CheckKeys(j,
            {"dim", "latent_dim", "n_speakers", "n_domains",
             "utts_per_speaker_domain", "domain_rotation_strength",
             "domain_bias_scale", "noise_std", "seed"},
            s);
  ReadKey(j, "dim", &c.dim, s);
  ReadKey(j, "latent_dim", &c.latent_dim, s);
  ReadKey(j, "n_speakers", &c.n_speakers, s);
  ReadKey(j, "n_domains", &c.n_domains, s);
  ReadKey(j, "utts_per_speaker_domain", &c.utts_per_speaker_domain, s);
  ReadKey(j, "domain_rotation_strength", &c.domain_rotation_strength, s);
  ReadKey(j, "domain_bias_scale", &c.domain_bias_scale, s);
  ReadKey(j, "noise_std", &c.noise_std, s);
  ReadKey(j, "seed", &c.seed, s);
}

Matrix SynthLatentBasis(const SynthConfig &cfg) {
  Rng rng = MakeStream(cfg.seed, kTagBasis, 0);
  Matrix g(cfg.dim, cfg.latent_dim);
  FillGaussian(rng, g);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(cfg.dim, cfg.latent_dim);
}

Matrix SynthRotationGenerator(const SynthConfig &cfg, int domain) {
  Rng rng = MakeStream(cfg.seed, kTagRotation, domain);
  Matrix g(cfg.dim, cfg.dim);
  FillGaussian(rng, g);
  // Entries of (G - G^T) / sqrt(2 D) have variance 1/D, which keeps the
  // spectral radius of the generator O(1) independently of D.
  return (g - g.transpose()) / std::sqrt(2.0 * cfg.dim);
}

SynthDomain SynthDomainParams(const SynthConfig &cfg, int domain) {
  SynthDomain out;
  Matrix a = cfg.domain_rotation_strength * SynthRotationGenerator(cfg, domain);
  out.rotation = a.exp();
  Rng rng = MakeStream(cfg.seed, kTagBias, domain);
  out.bias.resize(cfg.dim);
  FillGaussian(rng, out.bias);
  out.bias *= cfg.domain_bias_scale;
  return out;
}

EmbeddingDataset GenerateSsmc(const SynthConfig &cfg) {
  cfg.Check();
  const Matrix basis = SynthLatentBasis(cfg);

  std::vector<Vector> speaker_means(cfg.n_speakers);
  for (int k = 0; k < cfg.n_speakers; ++k) {
    Rng rng = MakeStream(cfg.seed, kTagSpeaker, k);
    Vector s(cfg.latent_dim);
    FillGaussian(rng, s);
    speaker_means[k] = basis * s;
  }

  EmbeddingDataset ds(cfg.dim);
  std::uint64_t record = 0;
  char id[96];
  for (int d = 0; d < cfg.n_domains; ++d) {
    const SynthDomain dom = SynthDomainParams(cfg, d);
    for (int k = 0; k < cfg.n_speakers; ++k) {
      const Vector center = dom.rotation * speaker_means[k] + dom.bias;
      for (int u = 0; u < cfg.utts_per_speaker_domain; ++u, ++record) {
        Rng rng = MakeStream(cfg.seed, kTagNoise, record);
        Vector noise(cfg.dim);
        FillGaussian(rng, noise);
        EmbeddingRecord rec;
        std::snprintf(id, sizeof(id), "dom%02d-spk%04d-utt%03d", d, k, u);
        rec.utterance_id = id;
        std::snprintf(id, sizeof(id), "spk%04d", k);
        rec.speaker_id = id;
        std::snprintf(id, sizeof(id), "dom%02d", d);
        rec.domain_id = id;
        rec.vector = center + cfg.noise_std * noise;
        ds.Add(std::move(rec));
      }
    }
  }
  return ds;
}

}  // namespace rmaml
