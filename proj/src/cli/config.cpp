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

#include <fstream>
#include <set>
#include <string>

#include "ser/cli.hpp"
#include "ser/data/checkpoint.hpp"
#include "ser/errors.hpp"

namespace ser::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidConfig(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (allowed.count(key) == 0) throw InvalidConfig("unknown key '" + key + "' in " + where);
  }
}

template <typename V>
void read(const json& obj, const char* key, V& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<V>();
  } catch (const json::exception&) {
    throw InvalidConfig(where + "." + key + " has the wrong type");
  }
}

model::EcaPreset parse_eca_preset(const std::string& name) {
  if (name == "none") return model::EcaPreset::none;
  if (name == "proposed") return model::EcaPreset::proposed;
  if (name == "original") return model::EcaPreset::original;
  throw InvalidConfig("unknown attention preset '" + name + "' (none, proposed, original)");
}

void parse_model(const json& j, model::ModelConfig& m) {
  reject_unknown(j, {"scale_n", "eca", "num_classes", "input_time", "input_mel"}, "model");
  read(j, "scale_n", m.scale_n, "model");
  read(j, "num_classes", m.num_classes, "model");
  read(j, "input_time", m.input_time, "model");
  read(j, "input_mel", m.input_mel, "model");
  if (!j.contains("eca")) return;
  const json& eca = j.at("eca");
  if (eca.is_string()) {
    m.eca = model::eca_preset(parse_eca_preset(eca.get<std::string>()), m.scale_n);
    return;
  }
  json wrapped = data::model_config_to_json(m);
  wrapped["eca"] = eca;
  m = data::model_config_from_json(wrapped);
}

void parse_train(const json& j, train::TrainConfig& t) {
  reject_unknown(j,
                 {"learning_rate", "weight_decay", "decay_mode", "batch_size", "epochs", "gamma", "folds", "seed",
                  "precision", "threads"},
                 "train");
  read(j, "learning_rate", t.learning_rate, "train");
  read(j, "weight_decay", t.weight_decay, "train");
  read(j, "batch_size", t.batch_size, "train");
  read(j, "epochs", t.epochs, "train");
  read(j, "gamma", t.gamma, "train");
  read(j, "folds", t.folds, "train");
  read(j, "seed", t.seed, "train");
  read(j, "threads", t.threads, "train");
  if (j.contains("decay_mode")) {
    std::string mode;
    read(j, "decay_mode", mode, "train");
    if (mode == "l2") {
      t.decay_mode = train::DecayMode::l2;
    } else if (mode == "inverse_time") {
      t.decay_mode = train::DecayMode::inverse_time;
    } else {
      throw InvalidConfig("train.decay_mode must be 'l2' or 'inverse_time'");
    }
  }
  if (j.contains("precision")) {
    std::string p;
    read(j, "precision", p, "train");
    if (p == "single") {
      t.precision = train::Precision::single;
    } else if (p == "double") {
      t.precision = train::Precision::double_precision;
    } else {
      throw InvalidConfig("train.precision must be 'single' or 'double'");
    }
  }
}

void parse_data(const json& j, DataConfig& d) {
  reject_unknown(j, {"kind", "synthetic", "manifest", "cache_dir"}, "data");
  read(j, "kind", d.kind, "data");
  read(j, "manifest", d.manifest, "data");
  read(j, "cache_dir", d.cache_dir, "data");
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    reject_unknown(s, {"per_class", "seed"}, "data.synthetic");
    read(s, "per_class", d.synth_per_class, "data.synthetic");
    read(s, "seed", d.synth_seed, "data.synthetic");
  }
}

void parse_augmentation(const json& j, data::AugmentationPlan& plan) {
  reject_unknown(j, {"preset", "count", "test_version", "train_versions", "include_base"}, "augmentation");
  if (j.contains("preset")) {
    std::string preset;
    int count = 7;
    read(j, "preset", preset, "augmentation");
    read(j, "count", count, "augmentation");
    if (preset == "ascending") {
      plan = data::AugmentationPlan::ascending(count);
    } else if (preset == "descending") {
      plan = data::AugmentationPlan::descending(count);
    } else if (preset == "none") {
      plan.train_versions.clear();
    } else {
      throw InvalidConfig("augmentation.preset must be 'none', 'ascending' or 'descending'");
    }
  } else if (j.contains("count")) {
    throw InvalidConfig("augmentation.count needs augmentation.preset");
  }
  read(j, "test_version", plan.test_version, "augmentation");
  read(j, "train_versions", plan.train_versions, "augmentation");
  read(j, "include_base", plan.include_base, "augmentation");
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
  plan.validate();
  if (data.kind == "synthetic") {
    if (data.synth_per_class < 1) throw InvalidConfig("data.synthetic.per_class must be at least 1");
  } else if (data.kind == "manifest") {
    if (data.manifest.empty()) throw InvalidConfig("data.manifest is required for kind 'manifest'");
  } else {
    throw InvalidConfig("data.kind must be 'synthetic' or 'manifest'");
  }
  if (model.num_classes != 4) throw InvalidConfig("model.num_classes must be 4 for the emotion label set");
}

RunConfig default_run_config() { return {}; }

RunConfig paper_best_config() {
  RunConfig c;
  c.preset = "paper-best";
  c.model = model::ModelConfig::with_preset(4, model::EcaPreset::proposed);
  c.plan = data::AugmentationPlan::descending(7);
  c.data.kind = "manifest";
  return c;
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j, {"preset", "model", "train", "data", "augmentation"}, "config");
  RunConfig c;
  if (j.contains("preset")) {
    std::string preset;
    read(j, "preset", preset, "config");
    if (preset == "paper-best") {
      c = paper_best_config();
    } else if (preset != "default" && !preset.empty()) {
      throw InvalidConfig("unknown preset '" + preset + "' (default, paper-best)");
    }
    c.preset = preset;
  }
  if (j.contains("model")) parse_model(j.at("model"), c.model);
  if (j.contains("train")) parse_train(j.at("train"), c.train);
  if (j.contains("data")) parse_data(j.at("data"), c.data);
  if (j.contains("augmentation")) parse_augmentation(j.at("augmentation"), c.plan);
  c.validate();
  return c;
}

json run_config_to_json(const RunConfig& c) {
  json out;
  out["preset"] = c.preset.empty() ? "default" : c.preset;
  out["model"] = data::model_config_to_json(c.model);
  const auto& t = c.train;
  out["train"] = {{"learning_rate", t.learning_rate},
                  {"weight_decay", t.weight_decay},
                  {"decay_mode", t.decay_mode == train::DecayMode::l2 ? "l2" : "inverse_time"},
                  {"batch_size", t.batch_size},
                  {"epochs", t.epochs},
                  {"gamma", t.gamma},
                  {"folds", t.folds},
                  {"seed", t.seed},
                  {"precision", t.precision == train::Precision::single ? "single" : "double"},
                  {"threads", t.threads}};
  out["data"] = {{"kind", c.data.kind},
                 {"synthetic", {{"per_class", c.data.synth_per_class}, {"seed", c.data.synth_seed}}},
                 {"manifest", c.data.manifest},
                 {"cache_dir", c.data.cache_dir}};
  out["augmentation"] = {{"test_version", c.plan.test_version},
                         {"train_versions", c.plan.train_versions},
                         {"include_base", c.plan.include_base}};
  return out;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfig("config " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = parse_run_config(j);
  const auto base = std::filesystem::absolute(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.data.manifest);
  resolve(c.data.cache_dir);
  return c;
}

}  // namespace ser::cli
