// Copyright 2026 The ser-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ser/cli.hpp"
#include "ser/memory.hpp"

namespace {

template <typename T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  ser::tune_allocator();
  CLI::App app{"ser_forge: log-Mel CNN speech emotion recognition with channel attention"};
  app.require_subcommand(1);

  ser::cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic 4-class corpus as WAV files plus a manifest");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--per-class", synth.per_class, "Utterances per class")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();

  ser::cli::PreprocessOptions pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Compute log-Mel caches for each (utterance, dataset version)");
  pre_cmd->add_option("--manifest", pre.manifest, "Manifest CSV (utterance_id,wav_path,label)")->required();
  pre_cmd->add_option("--versions", pre.versions, "Dataset versions, e.g. 1,8")->delimiter(',')->capture_default_str();
  pre_cmd->add_option("--out", pre.out, "Cache root (default: $SER_FORGE_CACHE_DIR)");
  pre_cmd->add_option("--threads", pre.threads, "Worker threads")->capture_default_str();
  pre_cmd->add_flag("--force", pre.force, "Recompute existing cache files");

  ser::cli::TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Cross-validate a model and write a run directory");
  train_cmd->add_option("--config", tr.config, "Run config JSON (default: built-in defaults)");
  train_cmd->add_option("--out", tr.out, "Run directory")->required();
  optional_flag(train_cmd, "--seed", tr.seed, "Override train.seed");
  optional_flag(train_cmd, "--threads", tr.threads, "Concurrent folds (1 for bitwise determinism)");
  train_cmd->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  ser::cli::EvaluateOptions ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Re-score a run's fold checkpoints on their test folds");
  eval_cmd->add_option("--run", ev.run, "Run directory")->required();
  optional_flag(eval_cmd, "--threads", ev.threads, "Unused; accepted for symmetry");

  ser::cli::SweepOptions sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cross-validate every point of a configuration grid");
  sweep_cmd->add_option("--config", sw.grid, "Sweep grid JSON")->required();
  sweep_cmd->add_option("--out", sw.out, "Output directory")->required();
  optional_flag(sweep_cmd, "--seed", sw.seed, "Override the base seed");
  optional_flag(sweep_cmd, "--threads", sw.threads, "Concurrent folds");
  sweep_cmd->add_flag("--force", sw.force, "Ignore completed points from an earlier run");
  sweep_cmd->add_flag("--quiet", sw.quiet, "No per-fold progress");

  ser::cli::ReportOptions rep;
  auto* report_cmd = app.add_subcommand("report", "Summarize a run and export per-class attention weights");
  report_cmd->add_option("--run", rep.run, "Run directory")->required();
  report_cmd->add_option("--out", rep.out, "Output directory (default: the run directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ser::cli::kExitOk : ser::cli::kExitValidation;
  }

  try {
    if (*synth_cmd) return ser::cli::cmd_synth(synth, std::cout);
    if (*pre_cmd) return ser::cli::cmd_preprocess(pre, std::cout);
    if (*train_cmd) return ser::cli::cmd_train(tr, std::cout);
    if (*eval_cmd) return ser::cli::cmd_evaluate(ev, std::cout);
    if (*sweep_cmd) return ser::cli::cmd_sweep(sw, std::cout);
    if (*report_cmd) return ser::cli::cmd_report(rep, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ser::cli::exit_code_for(e);
  }
  return ser::cli::kExitRuntime;
}
