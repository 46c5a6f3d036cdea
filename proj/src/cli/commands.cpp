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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "ser/cli.hpp"
#include "ser/data/cache.hpp"
#include "ser/data/checkpoint.hpp"
#include "ser/data/labels.hpp"
#include "ser/data/manifest.hpp"
#include "ser/data/source.hpp"
#include "ser/data/wav.hpp"
#include "ser/dsp.hpp"
#include "ser/errors.hpp"
#include "ser/training/metrics.hpp"

namespace ser::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidConfig*>(&e) != nullptr || dynamic_cast<const InvalidInput*>(&e) != nullptr ||
      dynamic_cast<const ManifestError*>(&e) != nullptr || dynamic_cast<const LeakageError*>(&e) != nullptr ||
      dynamic_cast<const IncompatibleCheckpoint*>(&e) != nullptr) {
    return kExitValidation;
  }
  return kExitRuntime;
}

namespace {

constexpr int kToolFormat = 1;

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

void write_text(const fs::path& path, const std::string& text) { data::write_file_atomic(path, as_bytes(text)); }

std::string read_text(const fs::path& path) {
  const auto bytes = data::read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + " is not valid JSON: " + e.what());
  }
}

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fraction_text(const train::Fraction& f) { return std::to_string(f.num) + "/" + std::to_string(f.den); }

std::string env_cache_dir() {
  const char* v = std::getenv(kCacheDirEnv);
  return v != nullptr ? std::string(v) : std::string();
}

std::vector<int> needed_versions(const data::AugmentationPlan& plan) {
  std::set<int> v(plan.train_versions.begin(), plan.train_versions.end());
  v.insert(plan.test_version);
  return {v.begin(), v.end()};
}

// Runs body(i) for i in [0, count) on up to `threads` workers.
template <typename F>
void parallel_for(std::size_t count, int threads, F&& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) body(i);
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
}

struct LoadedData {
  std::vector<data::LabeledUtterance> utterances;
  std::unique_ptr<data::SpectrogramSource> source;
  std::string input_hash;
  std::string description;
};

std::string tree_hash(const std::vector<std::string>& lines) {
  std::string all;
  for (const auto& l : lines) all += l + "\n";
  return blob_hash(as_bytes(all));
}

// Resolves the data section of a validated config. Everything that can be
// checked without computing spectrograms is checked here.
LoadedData load_data(const RunConfig& config) {
  LoadedData out;
  std::vector<std::string> hash_lines;
  if (config.data.kind == "synthetic") {
    auto utterances = data::synth_dataset(config.data.synth_per_class, config.data.synth_seed);
    for (const auto& u : utterances) {
      out.utterances.push_back({u.utterance_id, u.label});
      const auto& s = u.signal.samples;
      const std::span<const std::uint8_t> raw(reinterpret_cast<const std::uint8_t*>(s.data()), s.size() * sizeof(double));
      hash_lines.push_back(u.utterance_id + " " + std::to_string(u.label) + " " + blob_hash(raw));
    }
    out.source = std::make_unique<data::SignalSource>(std::move(utterances));
    out.description = "synthetic corpus, " + std::to_string(out.utterances.size()) + " utterances";
  } else {
    const auto entries = data::load_manifest(config.data.manifest);
    if (entries.empty()) throw InvalidInput("manifest " + config.data.manifest + " has no entries");
    const std::string cache_dir = config.data.cache_dir;
    if (cache_dir.empty()) {
      throw InvalidConfig("data.cache_dir (or " + std::string(kCacheDirEnv) +
                          ") must point at caches written by 'ser_forge preprocess'");
    }
    std::vector<std::string> missing;
    for (const auto& e : entries) {
      for (int v : needed_versions(config.plan)) {
        const auto p = data::cache_path(cache_dir, e.utterance_id, v);
        if (!fs::exists(p)) missing.push_back(p.string());
      }
      out.utterances.push_back({e.utterance_id, e.label});
    }
    if (!missing.empty()) {
      std::string msg = std::to_string(missing.size()) + " spectrogram caches missing under " + cache_dir +
                        " (run 'ser_forge preprocess'); first: " + missing.front();
      throw InvalidConfig(msg);
    }
    hash_lines.push_back("manifest " + blob_hash(data::read_file_bytes(config.data.manifest)));
    for (const auto& e : entries) {
      const std::string wav_hash = fs::exists(e.wav_path) ? blob_hash(data::read_file_bytes(e.wav_path)) : "absent";
      hash_lines.push_back(e.utterance_id + " " + std::to_string(e.label) + " " + wav_hash);
    }
    out.source = std::make_unique<data::CacheDirectorySource>(cache_dir);
    out.description = "manifest " + config.data.manifest + ", " + std::to_string(entries.size()) + " utterances";
  }
  out.input_hash = tree_hash(hash_lines);
  return out;
}

RunConfig resolve_config(const fs::path& path, const std::optional<std::uint64_t>& seed,
                         const std::optional<int>& threads) {
  RunConfig config = path.empty() ? default_run_config() : load_run_config(path);
  if (seed) config.train.seed = *seed;
  if (threads) config.train.threads = *threads;
  if (const auto env = env_cache_dir(); !env.empty()) config.data.cache_dir = env;
  config.validate();
  return config;
}

std::string class_label(int k) { return std::string(data::class_name(k)); }

json confusion_json(const train::ConfusionMatrix& cm) { return cm.rows(); }

std::string confusion_csv(const train::ConfusionMatrix& cm) {
  std::string out = "true\\predicted";
  for (int j = 0; j < cm.num_classes(); ++j) out += "," + class_label(j);
  out += "\n";
  for (int i = 0; i < cm.num_classes(); ++i) {
    out += class_label(i);
    for (int j = 0; j < cm.num_classes(); ++j) out += "," + std::to_string(cm.at(i, j));
    out += "\n";
  }
  return out;
}

train::ConfusionMatrix parse_confusion_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<std::int64_t>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    std::vector<std::int64_t> row;
    while (std::getline(cells, cell, ',')) row.push_back(std::stoll(cell));
    rows.push_back(std::move(row));
  }
  return train::ConfusionMatrix::from_rows(rows);
}

json metrics_json(const train::ConfusionMatrix& pooled) {
  const auto exact = train::exact_metrics_from_confusion(pooled);
  const auto recall = train::per_class_recall(pooled);
  json per_class = json::object();
  for (int k = 0; k < pooled.num_classes(); ++k) per_class[class_label(k)] = recall[static_cast<std::size_t>(k)];
  return {{"ua", exact.ua.value()},
          {"wa", exact.wa.value()},
          {"acc", exact.acc.value()},
          {"exact", {{"ua", fraction_text(exact.ua)}, {"wa", fraction_text(exact.wa)}, {"acc", fraction_text(exact.acc)}}},
          {"per_class_recall", per_class},
          {"confusion", confusion_json(pooled)},
          {"samples", pooled.total()}};
}

void print_metrics(std::ostream& log, const train::ConfusionMatrix& pooled) {
  const auto m = train::metrics_from_confusion(pooled);
  log << "  UA  " << fmt(100 * m.ua, 2) << "%   WA  " << fmt(100 * m.wa, 2) << "%   ACC " << fmt(100 * m.acc, 2)
      << "%\n";
  const auto recall = train::per_class_recall(pooled);
  log << "  per-class recall:";
  for (int k = 0; k < pooled.num_classes(); ++k) {
    log << " " << class_label(k) << "=" << fmt(100 * recall[static_cast<std::size_t>(k)], 2) << "%";
  }
  log << "\n";
}

std::vector<data::FoldSplit> parse_folds(const json& j) {
  std::vector<data::FoldSplit> out;
  try {
    for (const auto& f : j.at("folds")) {
      out.push_back({f.at("train_ids").get<std::vector<std::string>>(), f.at("test_ids").get<std::vector<std::string>>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("folds.json: ") + e.what());
  }
  return out;
}

fs::path checkpoint_file(const fs::path& run, std::size_t fold) {
  return run / "checkpoints" / ("fold_" + std::to_string(fold) + ".ckpt");
}

void require_run_files(const fs::path& run, int folds, bool need_metrics) {
  std::vector<fs::path> expected{run / "config.json", run / "folds.json"};
  if (need_metrics) {
    expected.push_back(run / "metrics.json");
    expected.push_back(run / "confusion.csv");
  }
  for (int k = 0; k < folds; ++k) expected.push_back(checkpoint_file(run, static_cast<std::size_t>(k)));
  std::string missing;
  for (const auto& p : expected) {
    if (!fs::exists(p)) missing += "\n  " + p.string();
  }
  if (!missing.empty()) throw InvalidInput("run directory " + run.string() + " is missing expected files:" + missing);
}

struct RunArtifacts {
  RunConfig config;
  std::vector<data::FoldSplit> splits;
};

RunArtifacts open_run(const fs::path& run, bool need_metrics, const std::optional<int>& threads) {
  if (!fs::exists(run / "config.json")) {
    throw InvalidInput("run directory " + run.string() + " is missing expected files:\n  " +
                       (run / "config.json").string());
  }
  RunArtifacts a;
  a.config = parse_run_config(read_json(run / "config.json"));
  if (threads) a.config.train.threads = *threads;
  if (const auto env = env_cache_dir(); !env.empty()) a.config.data.cache_dir = env;
  require_run_files(run, a.config.train.folds, need_metrics);
  a.splits = parse_folds(read_json(run / "folds.json"));
  if (a.splits.size() != static_cast<std::size_t>(a.config.train.folds)) {
    throw FormatError("folds.json lists " + std::to_string(a.splits.size()) + " folds, config expects " +
                      std::to_string(a.config.train.folds));
  }
  return a;
}

model::Model<float> model_from_checkpoint(const fs::path& path, const model::ModelConfig& expected) {
  const auto state = data::load_checkpoint(path, expected);
  model::Model<float> net(expected, 0);
  net.load_state(state);
  return net;
}

}  // namespace

int cmd_synth(const SynthOptions& options, std::ostream& log) {
  if (options.out.empty()) throw InvalidConfig("--out is required");
  if (options.per_class < 1) throw InvalidConfig("--per-class must be at least 1");
  const auto utterances = data::synth_dataset(options.per_class, options.seed);
  std::vector<data::ManifestEntry> entries;
  for (const auto& u : utterances) {
    const fs::path rel = fs::path("wav") / (u.utterance_id + ".wav");
    data::write_wav(options.out / rel, u.signal);
    entries.push_back({u.utterance_id, rel, u.label, std::nullopt});
  }
  data::write_manifest(options.out / "manifest.csv", entries);
  log << "wrote " << entries.size() << " utterances and " << (options.out / "manifest.csv").string() << "\n";
  return kExitOk;
}

int cmd_preprocess(const PreprocessOptions& options, std::ostream& log) {
  fs::path out = options.out;
  if (out.empty()) out = env_cache_dir();
  if (out.empty()) throw InvalidConfig(std::string("--out or ") + kCacheDirEnv + " is required");
  if (options.versions.empty()) throw InvalidConfig("no dataset versions requested");
  std::set<int> versions;
  for (int v : options.versions) {
    dsp::dataset_version(v);
    versions.insert(v);
  }
  const auto entries = data::load_manifest(options.manifest);

  struct VersionTally {
    std::size_t written = 0, skipped = 0;
    std::set<std::pair<std::size_t, std::size_t>> shapes;
  };
  std::map<int, VersionTally> tally;
  std::vector<std::string> failures;
  std::mutex mutex;

  parallel_for(entries.size(), options.threads, [&](std::size_t i) {
    const auto& e = entries[i];
    try {
      std::optional<dsp::AudioSignal> signal;
      for (int v : versions) {
        const auto path = data::cache_path(out, e.utterance_id, v);
        if (!options.force && fs::exists(path)) {
          std::lock_guard lock(mutex);
          ++tally[v].skipped;
          continue;
        }
        if (!signal) signal = data::read_wav(e.wav_path);
        auto spec = dsp::preprocess_version(*signal, dsp::dataset_version(v));
        spec.utterance_id = e.utterance_id;
        spec.label = e.label;
        data::write_cache(spec, path);
        std::lock_guard lock(mutex);
        ++tally[v].written;
        tally[v].shapes.insert({spec.num_frames, spec.n_mels});
      }
    } catch (const std::exception& ex) {
      std::lock_guard lock(mutex);
      failures.push_back(e.utterance_id + ": " + ex.what());
    }
  });
  std::sort(failures.begin(), failures.end());

  json summary = {{"manifest", options.manifest.string()}, {"cache_dir", out.string()},
                  {"utterances", entries.size()}, {"versions", json::array()}, {"failures", failures}};
  log << "version  window_ms  window  stride  fft   written  skipped  shape\n";
  for (int v : versions) {
    const auto dv = dsp::dataset_version(v);
    const auto win = dv.window_samples(dsp::kDefaultSampleRate);
    const auto fft = dsp::resolve_fft_size(win);
    const auto& t = tally[v];
    std::string shapes;
    json shape_list = json::array();
    for (const auto& [frames, mels] : t.shapes) {
      shapes += (shapes.empty() ? "" : " ") + std::to_string(frames) + "x" + std::to_string(mels);
      shape_list.push_back({frames, mels});
    }
    if (shapes.empty()) shapes = "-";
    std::ostringstream row;
    row << std::left << std::setw(9) << v << std::setw(11) << dv.window_ms << std::setw(8) << win << std::setw(8)
        << dv.stride_samples(dsp::kDefaultSampleRate) << std::setw(6) << fft << std::setw(9) << t.written
        << std::setw(9) << t.skipped << shapes;
    log << row.str() << "\n";
    summary["versions"].push_back({{"version", v},
                                   {"window_ms", dv.window_ms},
                                   {"overlap_ms", dv.overlap_ms},
                                   {"window_samples", win},
                                   {"stride_samples", dv.stride_samples(dsp::kDefaultSampleRate)},
                                   {"fft_size", fft},
                                   {"written", t.written},
                                   {"skipped", t.skipped},
                                   {"shapes", shape_list}});
  }
  write_text(out / "summary.json", summary.dump(2) + "\n");
  for (const auto& f : failures) log << "FAILED " << f << "\n";
  return failures.empty() ? kExitOk : kExitRuntime;
}

int cmd_train(const TrainOptions& options, std::ostream& log) {
  if (options.out.empty()) throw InvalidConfig("--out is required");
  const RunConfig config = resolve_config(options.config, options.seed, options.threads);
  const LoadedData loaded = load_data(config);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  fs::create_directories(options.out / "checkpoints");
  const json config_json = run_config_to_json(config);
  write_text(options.out / "config.json", config_json.dump(2) + "\n");
  log << "training " << config.model.label() << " on " << loaded.description << ", " << config.train.folds
      << " folds x " << config.train.epochs << " epochs\n";

  const train::CvDataset dataset{loaded.utterances, loaded.source.get(), config.plan};
  train::EpochCallback progress;
  if (!options.quiet) {
    progress = [&log, epochs = config.train.epochs](const train::EpochStats& s) {
      if (s.epoch == 1 || s.epoch % 10 == 0 || s.epoch == epochs) {
        log << "  fold " << s.fold << " epoch " << s.epoch << " loss " << fmt(s.loss, 5) << " acc "
            << fmt(s.running_accuracy, 3) << "\n"
            << std::flush;
      }
    };
  }
  const auto result = train::cross_validate(config.model, config.train, dataset, 0, progress);
  for (const auto& w : result.warnings) log << "warning: " << w << "\n";

  json metrics = metrics_json(result.pooled);
  metrics["model"] = config.model.label();
  metrics["parameters"] = model::Model<float>(config.model, 0).parameter_count();
  json fold_rows = json::array();
  json folds_doc = {{"seed", config.train.seed}, {"folds", json::array()}};
  std::string curves = "fold,epoch,loss,running_accuracy\n";
  for (const auto& f : result.folds) {
    const auto& split = result.splits[f.fold];
    std::int64_t correct = 0;
    for (int k = 0; k < f.confusion.num_classes(); ++k) correct += f.confusion.at(k, k);
    fold_rows.push_back({{"fold", f.fold},
                         {"train_accuracy", f.train_accuracy},
                         {"final_loss", f.loss_curve.back()},
                         {"test_size", f.confusion.total()},
                         {"test_correct", correct},
                         {"confusion", confusion_json(f.confusion)}});
    folds_doc["folds"].push_back({{"fold", f.fold},
                                  {"seed", f.seed},
                                  {"train_ids", split.train_ids},
                                  {"test_ids", split.test_ids},
                                  {"test_predictions", f.test_predictions}});
    for (std::size_t e = 0; e < f.loss_curve.size(); ++e) {
      curves += std::to_string(f.fold) + "," + std::to_string(e + 1) + "," + fmt_g(f.loss_curve[e]) + "," +
                fmt_g(f.running_accuracy[e]) + "\n";
    }
    data::save_checkpoint(f.state, checkpoint_file(options.out, f.fold));
  }
  metrics["folds"] = fold_rows;

  const std::string metrics_text = metrics.dump(2) + "\n";
  const std::string confusion_text = confusion_csv(result.pooled);
  const std::string folds_text = folds_doc.dump(2) + "\n";
  write_text(options.out / "metrics.json", metrics_text);
  write_text(options.out / "confusion.csv", confusion_text);
  write_text(options.out / "loss_curves.csv", curves);
  write_text(options.out / "folds.json", folds_text);

  json outputs = {{"config.json", sha256_hex(as_bytes(config_json.dump(2) + "\n"))},
                  {"metrics.json", sha256_hex(as_bytes(metrics_text))},
                  {"confusion.csv", sha256_hex(as_bytes(confusion_text))},
                  {"loss_curves.csv", sha256_hex(as_bytes(curves))},
                  {"folds.json", sha256_hex(as_bytes(folds_text))}};
  for (const auto& f : result.folds) {
    const auto rel = "checkpoints/fold_" + std::to_string(f.fold) + ".ckpt";
    outputs[rel] = sha256_hex(data::read_file_bytes(options.out / rel));
  }
  const json manifest = {
      {"tool", "ser_forge"},
      {"format", kToolFormat},
      {"command", "train"},
      {"replay", "ser_forge train --config config.json --threads 1 --out <dir>"},
      {"config", config_json},
      {"input_hash", loaded.input_hash},
      {"inputs", loaded.description},
      {"seed", config.train.seed},
      {"threads", config.train.threads},
      {"started_at", started},
      {"finished_at", utc_now()},
      {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
      {"metrics", {{"ua", metrics["ua"]}, {"wa", metrics["wa"]}, {"acc", metrics["acc"]}}},
      {"warnings", result.warnings},
      {"outputs", outputs}};
  write_text(options.out / "run_manifest.json", manifest.dump(2) + "\n");

  log << "cross-validated (pooled over " << result.pooled.total() << " test utterances):\n";
  print_metrics(log, result.pooled);
  log << "outputs in " << options.out.string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& log) {
  const RunArtifacts run = open_run(options.run, false, options.threads);
  const LoadedData loaded = load_data(run.config);
  train::ConfusionMatrix pooled(run.config.model.num_classes);
  json per_fold = json::array();
  for (std::size_t k = 0; k < run.splits.size(); ++k) {
    auto net = model_from_checkpoint(checkpoint_file(options.run, k), run.config.model);
    const auto assembled =
        data::assemble_augmented(loaded.utterances, run.splits, k, run.config.plan, loaded.source.get());
    const auto predictions = train::predict(net, assembled.test, static_cast<std::size_t>(run.config.train.batch_size));
    const auto cm = train::confusion_from_predictions(assembled.test, predictions, run.config.model.num_classes);
    pooled += cm;
    per_fold.push_back({{"fold", k}, {"confusion", confusion_json(cm)}});
  }
  json evaluation = metrics_json(pooled);
  evaluation["folds"] = per_fold;
  write_text(options.run / "evaluation.json", evaluation.dump(2) + "\n");
  log << "re-evaluated " << run.splits.size() << " fold checkpoints on their test folds:\n";
  print_metrics(log, pooled);

  if (fs::exists(options.run / "metrics.json")) {
    const json recorded = read_json(options.run / "metrics.json");
    const bool same = recorded.value("confusion", json()) == evaluation["confusion"];
    if (same) {
      log << "matches the recorded metrics.json\n";
    } else if (run.config.train.precision == train::Precision::double_precision) {
      log << "note: differs from metrics.json; checkpoints store double-precision runs in single precision\n";
    } else {
      log << "MISMATCH: re-evaluation differs from the recorded metrics.json\n";
      return kExitRuntime;
    }
  }
  return kExitOk;
}

SweepGrid parse_sweep_grid(const json& j) {
  if (!j.is_object()) throw InvalidConfig("sweep grid must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> allowed{"base", "scale_n", "eca", "versions", "augmentation"};
    if (allowed.count(key) == 0) throw InvalidConfig("unknown key '" + key + "' in sweep grid");
  }
  SweepGrid grid;
  grid.base = parse_run_config(j.value("base", json::object()));
  std::vector<int> scales{grid.base.model.scale_n};
  if (j.contains("scale_n")) scales = j.at("scale_n").get<std::vector<int>>();
  std::vector<json> ecas{data::model_config_to_json(grid.base.model).at("eca")};
  if (j.contains("eca")) ecas = j.at("eca").get<std::vector<json>>();
  if (j.contains("versions") && j.contains("augmentation")) {
    throw InvalidConfig("sweep grid takes either 'versions' or 'augmentation', not both");
  }
  std::vector<data::AugmentationPlan> plans;
  if (j.contains("augmentation")) {
    for (const auto& a : j.at("augmentation")) {
      RunConfig tmp = parse_run_config({{"augmentation", a}});
      plans.push_back(tmp.plan);
    }
  } else if (j.contains("versions")) {
    for (int v : j.at("versions").get<std::vector<int>>()) plans.push_back(data::AugmentationPlan::single(v));
  } else {
    plans.push_back(grid.base.plan);
  }
  if (scales.empty() || ecas.empty() || plans.empty()) throw InvalidConfig("sweep grid has an empty axis");
  for (int n : scales) {
    for (const auto& eca : ecas) {
      json model = data::model_config_to_json(grid.base.model);
      model["scale_n"] = n;
      model["eca"] = eca;
      const RunConfig point_config = parse_run_config({{"model", model}});
      for (const auto& plan : plans) {
        plan.validate();
        grid.points.push_back({point_config.model, plan});
      }
    }
  }
  return grid;
}

int cmd_sweep(const SweepOptions& options, std::ostream& log) {
  if (options.out.empty()) throw InvalidConfig("--out is required");
  json grid_json;
  try {
    grid_json = json::parse(read_text(options.grid));
  } catch (const json::parse_error& e) {
    throw InvalidConfig("sweep grid " + options.grid.string() + " is not valid JSON: " + e.what());
  } catch (const Error&) {
    throw InvalidConfig("cannot read sweep grid " + options.grid.string());
  }
  if (grid_json.contains("base")) {
    // Relative data paths resolve against the grid file, as for configs.
    auto& data_section = grid_json["base"]["data"];
    const auto base_dir = fs::absolute(options.grid).parent_path();
    for (const char* key : {"manifest", "cache_dir"}) {
      if (data_section.is_object() && data_section.contains(key)) {
        const fs::path p = data_section[key].get<std::string>();
        if (!p.empty() && p.is_relative()) data_section[key] = (base_dir / p).lexically_normal().string();
      }
    }
  }
  SweepGrid grid = parse_sweep_grid(grid_json);
  if (options.seed) grid.base.train.seed = *options.seed;
  if (options.threads) grid.base.train.threads = *options.threads;
  if (const auto env = env_cache_dir(); !env.empty()) grid.base.data.cache_dir = env;
  grid.base.validate();
  RunConfig data_config = grid.base;
  for (const auto& p : grid.points) {
    for (int v : needed_versions(p.plan)) {
      if (std::find(data_config.plan.train_versions.begin(), data_config.plan.train_versions.end(), v) ==
              data_config.plan.train_versions.end() &&
          v != data_config.plan.test_version) {
        data_config.plan.train_versions.push_back(v);
      }
    }
  }
  const LoadedData loaded = load_data(data_config);

  fs::create_directories(options.out);
  const json base_json = run_config_to_json(grid.base);
  const std::string fingerprint = sha256_hex(as_bytes(base_json.dump() + "|" + loaded.input_hash));
  const fs::path progress_path = options.out / "sweep_progress.jsonl";
  train::SweepOptions sweep_options;
  if (!options.force && fs::exists(progress_path)) {
    std::istringstream in(read_text(progress_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json r;
      try {
        r = json::parse(line);
      } catch (const json::parse_error&) {
        continue;  // a torn final line from an interrupted run
      }
      if (r.value("fingerprint", "") != fingerprint || !r.value("error", "").empty()) continue;
      train::SweepRow row;
      row.version = r.at("version").get<int>();
      row.config = r.at("config").get<std::string>();
      row.params = r.at("params").get<std::size_t>();
      row.seed = r.at("seed").get<std::uint64_t>();
      row.metrics = train::Metrics{r.at("ua").get<double>(), r.at("wa").get<double>(), r.at("acc").get<double>()};
      sweep_options.completed[r.at("id").get<std::string>()] = row;
    }
    if (!sweep_options.completed.empty()) {
      log << "resuming: " << sweep_options.completed.size() << " grid points already complete\n";
    }
  } else if (options.force && fs::exists(progress_path)) {
    fs::remove(progress_path);
  }

  std::ofstream progress(progress_path, std::ios::app);
  sweep_options.on_row = [&](const train::SweepRow& row) {
    json r = {{"id", row.config + "@v" + std::to_string(row.version)},
              {"version", row.version},
              {"config", row.config},
              {"params", row.params},
              {"seed", row.seed},
              {"fingerprint", fingerprint},
              {"error", row.error}};
    if (row.metrics) {
      r["ua"] = row.metrics->ua;
      r["wa"] = row.metrics->wa;
      r["acc"] = row.metrics->acc;
    }
    progress << r.dump() << "\n" << std::flush;
    log << "  v" << row.version << " " << row.config << ": "
        << (row.metrics ? "ACC " + fmt(100 * row.metrics->acc, 2) + "%" : "FAILED " + row.error) << "\n"
        << std::flush;
  };
  if (!options.quiet) {
    sweep_options.on_epoch = [&log, epochs = grid.base.train.epochs](const train::EpochStats& s) {
      if (s.epoch == epochs) log << "    fold " << s.fold << " done, loss " << fmt(s.loss, 5) << "\n" << std::flush;
    };
  }
  log << "sweeping " << grid.points.size() << " grid points on " << loaded.description << "\n";
  const auto rows = train::run_sweep(grid.points, grid.base.train, loaded.utterances, *loaded.source, sweep_options);

  std::string wide = "version,config,ua,wa,acc,params,seed,status\n";
  std::string long_form = "version,config,metric,value\n";
  bool failed = false;
  for (const auto& r : rows) {
    const std::string status = r.error.empty() ? "ok" : "failed";
    failed = failed || !r.error.empty();
    const std::string ua = r.metrics ? fmt(r.metrics->ua) : "";
    const std::string wa = r.metrics ? fmt(r.metrics->wa) : "";
    const std::string acc = r.metrics ? fmt(r.metrics->acc) : "";
    wide += std::to_string(r.version) + "," + r.config + "," + ua + "," + wa + "," + acc + "," +
            std::to_string(r.params) + "," + std::to_string(r.seed) + "," + status + "\n";
    if (r.metrics) {
      for (const auto& [name, value] : {std::pair{"ua", ua}, std::pair{"wa", wa}, std::pair{"acc", acc}}) {
        long_form += std::to_string(r.version) + "," + r.config + "," + name + "," + value + "\n";
      }
    }
  }
  write_text(options.out / "sweep.csv", wide);
  write_text(options.out / "sweep_long.csv", long_form);
  const json manifest = {{"tool", "ser_forge"},
                         {"format", kToolFormat},
                         {"command", "sweep"},
                         {"grid", grid_json},
                         {"base_config", base_json},
                         {"input_hash", loaded.input_hash},
                         {"seed", grid.base.train.seed},
                         {"finished_at", utc_now()},
                         {"points", grid.points.size()},
                         {"failed_points", std::count_if(rows.begin(), rows.end(),
                                                         [](const train::SweepRow& r) { return !r.error.empty(); })}};
  write_text(options.out / "run_manifest.json", manifest.dump(2) + "\n");
  log << "wrote " << (options.out / "sweep.csv").string() << " (" << rows.size() << " rows)\n";
  return failed ? kExitRuntime : kExitOk;
}

int cmd_report(const ReportOptions& options, std::ostream& log) {
  const RunArtifacts run = open_run(options.run, true, std::nullopt);
  const fs::path out = options.out.empty() ? options.run : options.out;
  const json metrics = read_json(options.run / "metrics.json");
  const auto pooled = parse_confusion_csv(read_text(options.run / "confusion.csv"));

  std::ostringstream text;
  text << "run: " << options.run.string() << "\n";
  text << "model: " << run.config.model.label() << ", test version " << run.config.plan.test_version
       << ", training versions";
  for (int v : run.config.plan.training_versions()) text << " " << v;
  text << "\n";
  print_metrics(text, pooled);
  text << "  confusion (rows true, columns predicted):\n";
  text << "    " << std::setw(10) << "";
  for (int j = 0; j < pooled.num_classes(); ++j) text << std::setw(10) << class_label(j);
  text << std::setw(10) << "support" << "\n";
  for (int i = 0; i < pooled.num_classes(); ++i) {
    text << "    " << std::setw(10) << class_label(i);
    for (int j = 0; j < pooled.num_classes(); ++j) text << std::setw(10) << pooled.at(i, j);
    text << std::setw(10) << pooled.row_sum(i) << "\n";
  }
  if (metrics.contains("folds")) {
    text << "  folds:";
    for (const auto& f : metrics.at("folds")) {
      text << " [" << f.value("fold", 0) << ": train " << fmt(100 * f.value("train_accuracy", 0.0), 1) << "%, test "
           << f.value("test_correct", 0) << "/" << f.value("test_size", 0) << "]";
    }
    text << "\n";
  }

  if (run.config.model.eca.empty()) {
    text << "note: this model has no attention blocks; channel-weight section omitted\n";
  } else {
    const LoadedData loaded = load_data(run.config);
    // Sums over every test utterance of every fold, per layer/class/channel.
    std::map<int, std::vector<std::vector<double>>> sums;
    std::vector<std::size_t> counts(static_cast<std::size_t>(run.config.model.num_classes), 0);
    for (std::size_t k = 0; k < run.splits.size(); ++k) {
      auto net = model_from_checkpoint(checkpoint_file(options.run, k), run.config.model);
      const auto assembled =
          data::assemble_augmented(loaded.utterances, run.splits, k, run.config.plan, loaded.source.get());
      std::vector<std::size_t> fold_counts(counts.size(), 0);
      for (const auto& e : assembled.test) ++fold_counts[static_cast<std::size_t>(e.label)];
      for (const auto& placement : run.config.model.eca) {
        const auto means = train::eca_class_means(net, assembled.test, placement.layer, run.config.model.num_classes);
        auto& layer_sums = sums[placement.layer];
        layer_sums.resize(means.size());
        for (std::size_t c = 0; c < means.size(); ++c) {
          if (means[c].empty()) continue;
          layer_sums[c].resize(means[c].size(), 0.0);
          for (std::size_t ch = 0; ch < means[c].size(); ++ch) {
            layer_sums[c][ch] += means[c][ch] * static_cast<double>(fold_counts[c]);
          }
        }
      }
      for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += fold_counts[c];
    }
    std::string csv = "layer,class,channel,mean_score\n";
    for (const auto& [layer, per_class] : sums) {
      text << "  attention after block " << layer << ": mean channel score per class";
      for (std::size_t c = 0; c < per_class.size(); ++c) {
        if (per_class[c].empty()) continue;
        double avg = 0.0;
        for (std::size_t ch = 0; ch < per_class[c].size(); ++ch) {
          const double m = per_class[c][ch] / static_cast<double>(counts[c]);
          avg += m;
          csv += std::to_string(layer) + "," + class_label(static_cast<int>(c)) + "," + std::to_string(ch) + "," +
                 fmt(m, 8) + "\n";
        }
        text << " " << class_label(static_cast<int>(c)) << "=" << fmt(avg / static_cast<double>(per_class[c].size()), 4);
      }
      text << "\n";
    }
    write_text(out / "eca_channel_weights.csv", csv);
    text << "  channel weights: " << (out / "eca_channel_weights.csv").string() << "\n";
  }
  write_text(out / "report.txt", text.str());
  log << text.str();
  return kExitOk;
}

}  // namespace ser::cli
