// src/cli.cc

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

#include "rmaml/cli.h"

#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"

namespace rmaml {

namespace {

constexpr std::uint64_t kTrialStream = 0x747269616c;  // "trial"

void WriteText(const std::string &text, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw DataError("error writing '" + path + "'");
}

std::string ReadActivation(const Json &j, const char *key, Activation def) {
  std::string name = ActivationName(def);
  ReadKey(j, key, &name, "net");
  return name;
}

}  // namespace

void to_json(Json &j, const SplitConfig &c) {
  j = Json{{"held_out_domains", c.held_out_domains}};
}

void from_json(const Json &j, SplitConfig &c) {
  CheckKeys(j, {"held_out_domains"}, "split");
  ReadKey(j, "held_out_domains", &c.held_out_domains, "split");
  if (c.held_out_domains.empty())
    throw ConfigError("split.held_out_domains must not be empty");
}

void to_json(Json &j, const NetConfig &c) {
  j = Json{{"hidden_dims", c.hidden_dims},
           {"hidden_activation", ActivationName(c.hidden_activation)},
           {"embedding_activation", ActivationName(c.embedding_activation)}};
}

void from_json(const Json &j, NetConfig &c) {
  CheckKeys(j, {"hidden_dims", "hidden_activation", "embedding_activation"},
            "net");
  ReadKey(j, "hidden_dims", &c.hidden_dims, "net");
  c.hidden_activation = ParseActivation(
      ReadActivation(j, "hidden_activation", c.hidden_activation));
  c.embedding_activation = ParseActivation(
      ReadActivation(j, "embedding_activation", c.embedding_activation));
  if (c.hidden_dims.empty())
    throw ConfigError("net.hidden_dims needs at least one layer");
  for (int d : c.hidden_dims)
    if (d < 1) throw ConfigError("net.hidden_dims entries must be >= 1");
}

void to_json(Json &j, const EvalConfig &c) {
  j = Json{{"all_pairs", c.all_pairs},
           {"n_target", c.n_target},
           {"n_nontarget", c.n_nontarget},
           {"seed", c.seed},
           {"threads", c.threads}};
}

void from_json(const Json &j, EvalConfig &c) {
  const std::string s = "eval";
  CheckKeys(j, {"all_pairs", "n_target", "n_nontarget", "seed", "threads"}, s);
  ReadKey(j, "all_pairs", &c.all_pairs, s);
  ReadKey(j, "n_target", &c.n_target, s);
  ReadKey(j, "n_nontarget", &c.n_nontarget, s);
  ReadKey(j, "seed", &c.seed, s);
  ReadKey(j, "threads", &c.threads, s);
  if (c.n_target < 1 || c.n_nontarget < 1)
    throw ConfigError("eval.n_target and eval.n_nontarget must be >= 1");
  if (c.threads < 1) throw ConfigError("eval.threads must be >= 1");
}

void to_json(Json &j, const ExperimentConfig &c) {
  j = Json{{"synth", c.synth}, {"split", c.split},     {"net", c.net},
           {"loss", c.loss},   {"train", c.train},     {"backend", c.backend},
           {"eval", c.eval}};
}

void from_json(const Json &j, ExperimentConfig &c) {
  CheckKeys(j, {"synth", "split", "net", "loss", "train", "backend", "eval"},
            "config");
  c = ExperimentConfig();
  if (j.contains("synth")) c.synth = j.at("synth").get<SynthConfig>();
  if (j.contains("split")) c.split = j.at("split").get<SplitConfig>();
  if (j.contains("net")) c.net = j.at("net").get<NetConfig>();
  if (j.contains("loss")) c.loss = j.at("loss").get<LossSpec>();
  if (j.contains("train")) c.train = j.at("train").get<TrainConfig>();
  if (j.contains("backend")) c.backend = j.at("backend").get<BackendConfig>();
  if (j.contains("eval")) c.eval = j.at("eval").get<EvalConfig>();
}

ExperimentConfig LoadExperimentConfig(const std::string &path) {
  if (path.empty()) return ExperimentConfig();
  Json j;
  try {
    j = ReadJsonFile(path);
  } catch (const DataError &e) {
    throw ConfigError(e.what());
  }
  return j.get<ExperimentConfig>();
}

void OverrideSeed(ExperimentConfig *cfg, std::uint64_t seed) {
  cfg->synth.seed = seed;
  cfg->train.seed = seed;
  cfg->eval.seed = seed;
}

NetArch MakeArch(const NetConfig &net, const LossSpec &loss, int input_dim,
                 int n_classes) {
  NetArch arch;
  arch.layer_dims.push_back(input_dim);
  arch.layer_dims.insert(arch.layer_dims.end(), net.hidden_dims.begin(),
                         net.hidden_dims.end());
  arch.hidden_activation = net.hidden_activation;
  arch.embedding_activation = net.embedding_activation;
  arch.head = loss.kind;
  arch.n_classes = n_classes;
  arch.Check();
  return arch;
}

TrialList MakeDomainTrials(const EmbeddingDataset &ds, const EvalConfig &cfg) {
  std::map<std::string, EmbeddingDataset> parts = PartitionByDomain(ds);
  TrialList out;
  const auto &domains = ds.Domains();
  for (std::size_t d = 0; d < domains.size(); ++d) {
    const EmbeddingDataset &part = parts.at(domains[d]);
    TrialList t;
    if (cfg.all_pairs) {
      t = MakeAllPairsTrials(part);
    } else {
      Rng rng = MakeStream(cfg.seed, kTrialStream, d);
      t = MakeTrials(part, rng, cfg.n_target, cfg.n_nontarget);
    }
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

std::vector<EerReportRow> EerByDomain(const EmbeddingDataset &ds,
                                      const TrialList &trials,
                                      const ScoreSet &scores,
                                      const std::string &scoring,
                                      const std::string &projector) {
  if (trials.size() != scores.Size())
    throw DataError("score count does not match trial count");
  std::vector<ScoreSet> per(ds.NumDomains());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const long r = ds.Find(trials[i].enroll_utt);
    if (r < 0)
      throw DataError("trial " + std::to_string(i + 1) +
                      ": unknown utterance '" + trials[i].enroll_utt + "'");
    ScoreSet &s = per[ds.DomainIndex(ds.Record(r).domain_id)];
    s.scores.push_back(scores.scores[i]);
    s.target.push_back(scores.target[i]);
  }
  std::vector<EerReportRow> rows;
  for (int d = 0; d < ds.NumDomains(); ++d) {
    if (per[d].Size() == 0) continue;
    rows.push_back(EerReportRow{ds.Domains()[d], scoring, projector,
                                100.0 * ComputeEer(per[d]).eer});
  }
  return rows;
}

ProbeFn MakeCosineProbe(const EmbeddingDataset &eval, const EvalConfig &cfg) {
  auto trials = std::make_shared<TrialList>(MakeDomainTrials(eval, cfg));
  return [&eval, trials, cfg](const ProjectionNet &net) {
    Projector proj;
    proj.ThenNet(net);
    ScoreSet s = ScoreTrials(CosineScorer(), proj, eval, *trials, cfg.threads);
    std::vector<std::pair<std::string, double>> out;
    for (const EerReportRow &row : EerByDomain(eval, *trials, s, "cosine", "net"))
      out.emplace_back(row.domain, row.eer_percent / 100.0);
    return out;
  };
}

void CmdSynth(const ExperimentConfig &cfg, const std::string &out_csv) {
  WriteDataset(GenerateSsmc(cfg.synth), out_csv);
}

void CmdSplit(const std::string &in_csv, const std::set<std::string> &held_out,
              const std::string &out_train, const std::string &out_eval) {
  DomainSplit split = SplitTrainEval(ReadDataset(in_csv), held_out);
  WriteDataset(split.train, out_train);
  WriteDataset(split.eval, out_eval);
}

void CmdTrain(const std::string &train_csv, const ExperimentConfig &cfg,
              const std::string &out_net, const std::string &out_log,
              const std::string &probe_csv, const std::string &out_probe) {
  EmbeddingDataset ds = ReadDataset(train_csv);
  TrainingData data = MakeTrainingData(ds);
  NetArch arch = MakeArch(cfg.net, cfg.loss, ds.Dim(), ds.NumSpeakers());
  ProjectionNet init = InitNet(arch, cfg.train.seed);
  EmbeddingDataset eval;
  ProbeFn probe;
  if (!probe_csv.empty()) {
    eval = ReadDataset(probe_csv);
    if (eval.Dim() != ds.Dim())
      throw DataError("probe data dimension does not match the training data");
    probe = MakeCosineProbe(eval, cfg.eval);
  }
  TrainResult r = Train(data, init, cfg.train, cfg.loss, probe);
  SaveNet(r.net, out_net);
  WriteText(IterationLogToCsv(r.log), out_log);
  if (!out_probe.empty()) WriteText(ProbeLogToCsv(r.log), out_probe);
}

void CmdTransform(const std::string &net_path, const std::string &in_csv,
                  const std::string &out_csv) {
  ProjectionNet net = LoadNet(net_path);
  EmbeddingDataset ds = ReadDataset(in_csv);
  if (ds.Dim() != net.Arch().InputDim())
    throw DataError("data dimension " + std::to_string(ds.Dim()) +
                    " does not match the net input " +
                    std::to_string(net.Arch().InputDim()));
  EmbeddingDataset out(net.Arch().EmbeddingDim());
  for (const EmbeddingRecord &r : ds.Records()) {
    const Vector e = Embed(net, r.vector);
    if (!e.allFinite())
      throw NumericError("non-finite embedding for '" + r.utterance_id + "'");
    out.Add(EmbeddingRecord{r.utterance_id, r.speaker_id, r.domain_id, e});
  }
  WriteDataset(out, out_csv);
}

void CmdFitBackend(const std::string &in_csv, const ExperimentConfig &cfg,
                   const std::string &out_lda, const std::string &out_plda) {
  Backend be = FitBackend(ReadDataset(in_csv), cfg.backend);
  WriteJsonFile(LdaToJson(be.lda), out_lda);
  WriteJsonFile(PldaToJson(be.plda_preproc, be.plda), out_plda);
}

void CmdMakeTrials(const std::string &in_csv, const ExperimentConfig &cfg,
                   const std::string &out_trials) {
  WriteTrials(MakeDomainTrials(ReadDataset(in_csv), cfg.eval), out_trials);
}

void CmdScore(const std::string &data_csv, const std::string &trials_path,
              const ScoreOptions &opts, const ExperimentConfig &cfg,
              const std::string &out_scores) {
  if (opts.scorer != "cosine" && opts.scorer != "plda")
    throw ConfigError("unknown scorer '" + opts.scorer +
                      "' (expected cosine or plda)");
  if (opts.scorer == "plda" && opts.plda_path.empty())
    throw ConfigError("--scorer plda needs --plda");
  EmbeddingDataset ds = ReadDataset(data_csv);
  TrialList trials = ReadTrials(trials_path);
  Projector proj;
  if (!opts.net_path.empty()) proj.ThenNet(LoadNet(opts.net_path));
  if (!opts.lda_path.empty())
    proj.ThenLda(LdaFromJson(ReadJsonFile(opts.lda_path)));
  PairScorer scorer = CosineScorer();
  if (opts.scorer == "plda") {
    Preproc pre;
    PldaModel plda = PldaFromJson(ReadJsonFile(opts.plda_path), &pre);
    scorer = PldaScorer(pre, plda);
  }
  ScoreSet scores = ScoreTrials(scorer, proj, ds, trials, cfg.eval.threads);
  WriteScores(trials, scores, out_scores);
}

void CmdEval(const std::vector<EvalInput> &inputs, const std::string &data_csv,
             const std::string &out_report) {
  EmbeddingDataset ds = ReadDataset(data_csv);
  std::vector<EerReportRow> rows;
  for (const EvalInput &in : inputs) {
    TrialList trials;
    ScoreSet scores = ReadScores(in.scores_path, &trials);
    std::vector<EerReportRow> r =
        EerByDomain(ds, trials, scores, in.scoring, in.projector);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  WriteEerReport(rows, out_report);
}

int RunCli(int argc, char **argv) {
  CLI::App app{"Robust MAML projection training and speaker verification "
               "scoring over fixed-length embeddings"};
  app.require_subcommand(1);

  std::string config_path;
  long long seed = -1;
  auto common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--seed", seed, "override the synth, train and eval seeds")
        ->check(CLI::NonNegativeNumber);
  };

  std::string in, out, out_train, out_eval, out_net, out_log, probe, out_probe;
  std::string net_path, data, trials_path, out_lda, out_plda;
  std::vector<std::string> held_out;
  ScoreOptions score_opts;

  CLI::App *synth = app.add_subcommand("synth", "generate synthetic data");
  common(synth);
  synth->add_option("--out", out, "output CSV")->required();

  CLI::App *split = app.add_subcommand("split", "hold out domains");
  common(split);
  split->add_option("--in", in, "input CSV")->required();
  split->add_option("--held-out", held_out,
                    "held-out domain ids (default: split.held_out_domains)");
  split->add_option("--out-train", out_train)->required();
  split->add_option("--out-eval", out_eval)->required();

  CLI::App *train = app.add_subcommand("train", "train a projection net");
  common(train);
  train->add_option("--train", in, "training CSV")->required();
  train->add_option("--out-net", out_net)->required();
  train->add_option("--out-log", out_log)->required();
  train->add_option("--probe", probe, "held-out CSV probed every eval_every");
  train->add_option("--out-probe", out_probe,
                    "probe EER CSV (default: <out-log>.probe.csv)");

  CLI::App *transform =
      app.add_subcommand("transform", "write penultimate-layer embeddings");
  common(transform);
  transform->add_option("--net", net_path)->required();
  transform->add_option("--in", in)->required();
  transform->add_option("--out", out)->required();

  CLI::App *fit = app.add_subcommand("fit-backend", "fit LDA and PLDA");
  common(fit);
  fit->add_option("--in", in)->required();
  fit->add_option("--out-lda", out_lda)->required();
  fit->add_option("--out-plda", out_plda)->required();

  CLI::App *mk = app.add_subcommand("make-trials", "per-domain trial list");
  common(mk);
  mk->add_option("--in", in)->required();
  mk->add_option("--out", out)->required();

  CLI::App *score = app.add_subcommand("score", "score a trial list");
  common(score);
  score->add_option("--data", data)->required();
  score->add_option("--trials", trials_path)->required();
  score->add_option("--scorer", score_opts.scorer, "cosine or plda");
  score->add_option("--net", score_opts.net_path, "projection net");
  score->add_option("--lda", score_opts.lda_path, "LDA model");
  score->add_option("--plda", score_opts.plda_path, "PLDA model");
  score->add_option("--out", out)->required();

  std::vector<std::string> eval_scores, eval_scoring, eval_projector;
  CLI::App *eval = app.add_subcommand("eval", "per-domain EER report");
  common(eval);
  eval->add_option("--scores", eval_scores, "scores files")->required();
  eval->add_option("--scoring", eval_scoring,
                   "scoring name per scores file (or one for all)");
  eval->add_option("--projector", eval_projector,
                   "projector name per scores file (or one for all)");
  eval->add_option("--data", data, "evaluation CSV")->required();
  eval->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig cfg = LoadExperimentConfig(config_path);
    if (seed >= 0) OverrideSeed(&cfg, static_cast<std::uint64_t>(seed));
    std::string primary;
    if (synth->parsed()) {
      primary = out;
      CmdSynth(cfg, out);
    } else if (split->parsed()) {
      if (!held_out.empty()) cfg.split.held_out_domains = held_out;
      primary = out_train;
      CmdSplit(in,
               std::set<std::string>(cfg.split.held_out_domains.begin(),
                                     cfg.split.held_out_domains.end()),
               out_train, out_eval);
    } else if (train->parsed()) {
      primary = out_net;
      if (!probe.empty() && out_probe.empty()) out_probe = out_log + ".probe.csv";
      CmdTrain(in, cfg, out_net, out_log, probe, out_probe);
    } else if (transform->parsed()) {
      primary = out;
      CmdTransform(net_path, in, out);
    } else if (fit->parsed()) {
      primary = out_plda;
      CmdFitBackend(in, cfg, out_lda, out_plda);
    } else if (mk->parsed()) {
      primary = out;
      CmdMakeTrials(in, cfg, out);
    } else if (score->parsed()) {
      primary = out;
      CmdScore(data, trials_path, score_opts, cfg, out);
    } else if (eval->parsed()) {
      primary = out;
      auto pick = [](const std::vector<std::string> &names, std::size_t i,
                     std::size_t n, const char *what, const std::string &def) {
        if (names.empty()) return def;
        if (names.size() == 1) return names[0];
        if (names.size() != n)
          throw ConfigError(std::string("--") + what +
                            " must be given once or once per --scores");
        return names[i];
      };
      std::vector<EvalInput> inputs;
      for (std::size_t i = 0; i < eval_scores.size(); ++i)
        inputs.push_back(EvalInput{
            eval_scores[i],
            pick(eval_scoring, i, eval_scores.size(), "scoring", "cosine"),
            pick(eval_projector, i, eval_scores.size(), "projector", "raw")});
      CmdEval(inputs, data, out);
    }
    WriteJsonFile(Json(cfg), primary + ".config.json");
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.ExitCode();
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rmaml
