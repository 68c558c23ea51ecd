// include/rmaml/cli.h

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

// Experiment configuration and the file-in/file-out commands behind the
// `rmaml` binary.  Each Cmd* function is the body of one subcommand.

#ifndef RMAML_CLI_H_
#define RMAML_CLI_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rmaml/backend.h"
#include "rmaml/evalkit.h"
#include "rmaml/json_util.h"
#include "rmaml/losses.h"
#include "rmaml/meta.h"
#include "rmaml/nncore.h"
#include "rmaml/synth.h"

namespace rmaml {

struct SplitConfig {
  std::vector<std::string> held_out_domains = {"dom04"};
};

/// Hidden layer sizes; the last entry is the embedding dimension.
struct NetConfig {
  std::vector<int> hidden_dims = {512, 512, 512};
  Activation hidden_activation = Activation::kRelu;
  Activation embedding_activation = Activation::kIdentity;
};

/// Trial generation and scoring settings.  Trials are built inside each
/// domain: every pair when all_pairs is set, otherwise a random sample.
struct EvalConfig {
  bool all_pairs = true;
  long n_target = 1000;
  long n_nontarget = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct ExperimentConfig {
  SynthConfig synth;
  SplitConfig split;
  NetConfig net;
  LossSpec loss;
  TrainConfig train;
  BackendConfig backend;
  EvalConfig eval;
};

void to_json(Json &j, const SplitConfig &c);
void from_json(const Json &j, SplitConfig &c);
void to_json(Json &j, const NetConfig &c);
void from_json(const Json &j, NetConfig &c);
void to_json(Json &j, const EvalConfig &c);
void from_json(const Json &j, EvalConfig &c);
void to_json(Json &j, const ExperimentConfig &c);
void from_json(const Json &j, ExperimentConfig &c);

/// Reads a config file; an empty path gives the defaults.  Missing sections
/// and keys take default values, unknown ones are a ConfigError.
ExperimentConfig LoadExperimentConfig(const std::string &path);
/// Sets the synth, train and eval seeds.
void OverrideSeed(ExperimentConfig *cfg, std::uint64_t seed);

NetArch MakeArch(const NetConfig &net, const LossSpec &loss, int input_dim,
                 int n_classes);

/// Trials inside each domain of ds, domains in first-appearance order.
TrialList MakeDomainTrials(const EmbeddingDataset &ds, const EvalConfig &cfg);

/// One EER row per domain (domain of the enrollment utterance).
std::vector<EerReportRow> EerByDomain(const EmbeddingDataset &ds,
                                      const TrialList &trials,
                                      const ScoreSet &scores,
                                      const std::string &scoring,
                                      const std::string &projector);

/// Probe for Train(): cosine EER of net embeddings per held-out domain.
ProbeFn MakeCosineProbe(const EmbeddingDataset &eval, const EvalConfig &cfg);

void CmdSynth(const ExperimentConfig &cfg, const std::string &out_csv);
void CmdSplit(const std::string &in_csv, const std::set<std::string> &held_out,
              const std::string &out_train, const std::string &out_eval);
void CmdTrain(const std::string &train_csv, const ExperimentConfig &cfg,
              const std::string &out_net, const std::string &out_log,
              const std::string &probe_csv, const std::string &out_probe);
void CmdTransform(const std::string &net_path, const std::string &in_csv,
                  const std::string &out_csv);
void CmdFitBackend(const std::string &in_csv, const ExperimentConfig &cfg,
                   const std::string &out_lda, const std::string &out_plda);
void CmdMakeTrials(const std::string &in_csv, const ExperimentConfig &cfg,
                   const std::string &out_trials);

struct ScoreOptions {
  std::string scorer = "cosine";  // cosine or plda
  std::string net_path;           // optional projection net
  std::string lda_path;           // optional LDA
  std::string plda_path;          // required for plda
};
void CmdScore(const std::string &data_csv, const std::string &trials_path,
              const ScoreOptions &opts, const ExperimentConfig &cfg,
              const std::string &out_scores);

struct EvalInput {
  std::string scores_path;
  std::string scoring;
  std::string projector;
};
void CmdEval(const std::vector<EvalInput> &inputs, const std::string &data_csv,
             const std::string &out_report);

/// Parses arguments and runs one subcommand.  Returns the process exit code:
/// 0 success, 2 config error, 3 data error, 4 numeric divergence.
int RunCli(int argc, char **argv);

}  // namespace rmaml

#endif  // RMAML_CLI_H_
