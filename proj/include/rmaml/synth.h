// include/rmaml/synth.h

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

#ifndef RMAML_SYNTH_H_
#define RMAML_SYNTH_H_

#include <cstdint>

#include "json.hpp"

#include "rmaml/common.h"
#include "rmaml/vecio.h"

namespace rmaml {

/// Generator of synthetic single-speaker multi-condition data.  Every
/// utterance vector is
///
///   x = Q_d P s_k + b_d + e,
///
/// with s_k ~ N(0, I_r) the speaker latent, P a fixed D x r matrix with
/// orthonormal columns, Q_d = exp(domain_rotation_strength * A_d) for a random
/// skew-symmetric A_d, b_d ~ N(0, domain_bias_scale^2 I) and
/// e ~ N(0, noise_std^2 I).
struct SynthConfig {
  int dim = 64;
  int latent_dim = 16;
  int n_speakers = 60;
  int n_domains = 5;
  int utts_per_speaker_domain = 24;
  double domain_rotation_strength = 0.3;
  double domain_bias_scale = 0.5;
  double noise_std = 1.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void Check() const;
};

void to_json(nlohmann::json &j, const SynthConfig &c);
/// Strict: unknown keys are a ConfigError.  Missing keys keep defaults.
void from_json(const nlohmann::json &j, SynthConfig &c);

/// Per-domain generative parameters, exposed for tests.
struct SynthDomain {
  Matrix rotation;  // Q_d, D x D orthogonal
  Vector bias;      // b_d
};

/// Random skew-symmetric generator A_d for domain `d`, scaled so that
/// rotation angles are O(1) in units of domain_rotation_strength.
Matrix SynthRotationGenerator(const SynthConfig &cfg, int domain);
SynthDomain SynthDomainParams(const SynthConfig &cfg, int domain);
/// The fixed D x r latent embedding P.
Matrix SynthLatentBasis(const SynthConfig &cfg);

EmbeddingDataset GenerateSsmc(const SynthConfig &cfg);

}  // namespace rmaml

#endif  // RMAML_SYNTH_H_
