// Copyright 2026 The MapsTP Authors
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

#include "mapstp/cli/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

#include "binary_io.hpp"
#include "mapstp/cli/selfcheck.hpp"
#include "mapstp/cli/svg.hpp"
#include "mapstp/errors.hpp"

namespace mapstp::cli
{

namespace fs = std::filesystem;

namespace
{

void ensure_dir(const fs::path & dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

void require_split_name(const std::string & split)
{
  if (split != "train" && split != "val" && split != "test") {
    throw ConfigError("unknown split '" + split + "' (expected train, val or test)");
  }
}

std::string full(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

scenegen::Dataset load_split(const fs::path & data, const std::string & split)
{
  require_split_name(split);
  return scenegen::read_dataset(split_path(data, split));
}

void check_horizon(const scenegen::Dataset & d, const model::ModelConfig & c, const std::string & split)
{
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    if (d.samples[i].future.size() != c.horizon) {
      throw DataError(
        split + " sample " + std::to_string(i) + " has " + std::to_string(d.samples[i].future.size()) +
        " future waypoints, model expects " + std::to_string(c.horizon));
    }
  }
}

}  // namespace

fs::path split_path(const fs::path & dir, const std::string & split) { return dir / (split + ".bin"); }

scenegen::DatasetSplits cmd_gen_data(const RunConfig & config, const fs::path & out, bool jsonl, std::ostream & log)
{
  config.data.validate();
  ensure_dir(out);
  scenegen::DatasetSplits splits = scenegen::generate_splits(config.seed, config.data);
  const std::pair<const char *, const scenegen::Dataset *> parts[] = {
    {"train", &splits.train}, {"val", &splits.val}, {"test", &splits.test}};
  const std::size_t scenes[] = {splits.train_scenes.size(), splits.val_scenes.size(), splits.test_scenes.size()};
  for (std::size_t i = 0; i < 3; ++i) {
    scenegen::write_dataset(*parts[i].second, split_path(out, parts[i].first));
    if (jsonl) {
      scenegen::write_dataset_jsonl(*parts[i].second, out / (std::string(parts[i].first) + ".jsonl"));
    }
    log << parts[i].first << ": " << scenes[i] << " scenes, " << parts[i].second->samples.size() << " samples\n";
  }
  return splits;
}

std::string format_loss_log(const std::vector<model::EpochLog> & log)
{
  std::string s = "epoch,train_loss,val_minade5\n";
  for (const auto & e : log) {
    s += std::to_string(e.epoch) + "," + full(e.train_loss) + "," + full(e.val_minade5) + "\n";
  }
  return s;
}

model::TrainResult cmd_train(const RunConfig & config, const fs::path & data, const fs::path & out, std::ostream & log)
{
  config.model.validate();
  config.train.validate();
  const scenegen::Dataset train = load_split(data, "train");
  const scenegen::Dataset val = load_split(data, "val");
  if (train.samples.empty()) {
    throw DataError("training split '" + split_path(data, "train").string() + "' is empty");
  }
  check_horizon(train, config.model, "train");
  check_horizon(val, config.model, "val");
  ensure_dir(out);
  const auto norm = statefeat::compute_norm_stats(train.samples);
  const auto train_set = model::prepare_samples(train, config.model.raster);
  const auto val_set = model::prepare_samples(val, config.model.raster);
  log << "training on " << train_set.size() << " samples, validating on " << val_set.size() << "\n";
  model::TrainConfig tc = config.train;
  tc.seed = config.seed;
  auto result = model::train(train_set, val_set, norm, config.model, tc, [&](const model::EpochLog & e) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "epoch %zu  train_loss %.6f  val_minade5 %.4f\n", e.epoch, e.train_loss, e.val_minade5);
    log << buf << std::flush;
  });
  model::save_checkpoint(result.checkpoint, out / kCheckpointFile);
  detail::write_text_file(out / kLossLogFile, format_loss_log(result.log));
  return result;
}

metrics::MetricsReport cmd_eval(
  const RunConfig & config, const fs::path & checkpoint, const fs::path & data, const fs::path & out, std::ostream & log)
{
  const model::Checkpoint ckpt = model::load_checkpoint(checkpoint);
  for (const auto k : config.eval.k_list) {
    if (k == 0 || k > ckpt.config.num_modes) {
      throw ConfigError(
        "k=" + std::to_string(k) + " exceeds the checkpoint's K=" + std::to_string(ckpt.config.num_modes));
    }
  }
  const scenegen::Dataset split = load_split(data, config.eval.split);
  if (split.samples.empty()) {
    throw DataError("split '" + config.eval.split + "' is empty");
  }
  check_horizon(split, ckpt.config, config.eval.split);
  const auto samples = model::prepare_samples(split, ckpt.config.raster);
  const model::Network net = ckpt.network();
  const auto report = metrics::evaluate(net, ckpt.norm, samples, config.eval.k_list, config.eval.d_list);
  ensure_dir(out);
  const std::string table = metrics::format_table(report, "MapsTP (synthetic, " + config.eval.split + ")");
  const std::string json = metrics::to_json(report);
  detail::write_text_file(out / ("report_" + config.eval.split + ".txt"), table);
  detail::write_text_file(out / ("report_" + config.eval.split + ".json"), json);
  log << table << json;
  return report;
}

fs::path cmd_predict(
  const RunConfig & config, const fs::path & checkpoint, const fs::path & data, const fs::path & out, std::ostream & log)
{
  const model::Checkpoint ckpt = model::load_checkpoint(checkpoint);
  const std::string & split_name = config.predict.split;
  const scenegen::Dataset split = load_split(data, split_name);
  const std::size_t index = config.predict.sample_index;
  if (index >= split.samples.size()) {
    throw DataError(
      "sample index " + std::to_string(index) + " out of range for split '" + split_name + "' with " +
      std::to_string(split.samples.size()) + " samples");
  }
  scenegen::Dataset one;
  one.scene_config = split.scene_config;
  one.samples = {split.samples[index]};
  check_horizon(one, ckpt.config, split_name);
  const scenegen::MapScene scene = scenegen::generate_scene(one.samples[0].scene_seed, one.scene_config);
  const raster::RasterImage image = raster::rasterize(scene, one.samples[0], ckpt.config.raster);
  const auto prepared = model::prepare_samples(one, ckpt.config.raster);
  const model::Network net = ckpt.network();
  const auto pred = net.predict(prepared[0].raster, statefeat::normalize_state(prepared[0].state, ckpt.norm));
  const std::string title = split_name + " sample " + std::to_string(index);
  ensure_dir(out);
  const fs::path path = out / ("predict_" + split_name + "_" + std::to_string(index) + ".svg");
  detail::write_text_file(path, render_prediction_svg(image, pred, prepared[0].future, title));
  const auto sel = model::select_trajectory(pred);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "selected mode %zu (p=%.4f)\n", sel.index, sel.probability);
  log << buf << "wrote " << path.string() << "\n";
  return path;
}

int run_cli(int argc, char ** argv)
{
  CLI::App app{"MapsTP: map- and state-conditioned multimodal trajectory prediction"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "mapstp_run";
  auto add_common = [&](CLI::App * sub) {
    sub->add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Seed (overrides the config file)");
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
  };

  auto * gen = app.add_subcommand("gen-data", "Generate train/val/test datasets");
  add_common(gen);
  std::optional<std::uint64_t> num_scenes;
  bool jsonl = false;
  gen->add_option("--num-scenes", num_scenes, "Number of scenes");
  gen->add_flag("--jsonl", jsonl, "Also write JSON-lines copies");

  std::string data_dir;
  std::string checkpoint;
  auto * trn = app.add_subcommand("train", "Train a model");
  add_common(trn);
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch;
  std::optional<double> lr;
  trn->add_option("--data", data_dir, "Dataset directory (default: --out)");
  trn->add_option("--epochs", epochs, "Epochs");
  trn->add_option("--batch-size", batch, "Mini-batch size");
  trn->add_option("--lr", lr, "Learning rate");

  auto * ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  add_common(ev);
  std::optional<std::string> split;
  std::vector<std::size_t> k_list;
  std::vector<double> d_list;
  ev->add_option("--checkpoint", checkpoint, "Checkpoint (default: <out>/checkpoint.bin)");
  ev->add_option("--data", data_dir, "Dataset directory (default: --out)");
  ev->add_option("--split", split, "train, val or test");
  ev->add_option("--k", k_list, "Top-k values")->delimiter(',');
  ev->add_option("--d", d_list, "Miss thresholds in meters")->delimiter(',');

  auto * pr = app.add_subcommand("predict", "Plot one sample's prediction as SVG");
  add_common(pr);
  std::optional<std::size_t> index;
  pr->add_option("--checkpoint", checkpoint, "Checkpoint (default: <out>/checkpoint.bin)");
  pr->add_option("--data", data_dir, "Dataset directory (default: --out)");
  pr->add_option("--split", split, "train, val or test");
  pr->add_option("--index", index, "Sample index within the split");

  auto * sc = app.add_subcommand("selfcheck", "Run gradient, metric and determinism checks");
  add_common(sc);
  std::string inject;
  sc->add_option("--inject-fault", inject)->group("");

  auto * cfg = app.add_subcommand("config", "Print the default configuration as TOML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cfg->parsed()) {
      std::cout << default_config_toml();
      return 0;
    }
    RunConfig rc = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) {
      rc.seed = *seed;
    }
    if (num_scenes) {
      rc.data.num_scenes = *num_scenes;
    }
    if (epochs) {
      rc.train.epochs = *epochs;
    }
    if (batch) {
      rc.train.batch_size = *batch;
    }
    if (lr) {
      rc.train.learning_rate = *lr;
    }
    if (!k_list.empty()) {
      rc.eval.k_list = k_list;
    }
    if (!d_list.empty()) {
      rc.eval.d_list = d_list;
    }
    if (split && ev->parsed()) {
      rc.eval.split = *split;
    }
    if (split && pr->parsed()) {
      rc.predict.split = *split;
    }
    if (index) {
      rc.predict.sample_index = *index;
    }
    const fs::path out = out_dir;
    const fs::path data = data_dir.empty() ? out : fs::path(data_dir);
    const fs::path ckpt = checkpoint.empty() ? out / kCheckpointFile : fs::path(checkpoint);

    if (gen->parsed()) {
      cmd_gen_data(rc, out, jsonl, std::cout);
    } else if (trn->parsed()) {
      cmd_train(rc, data, out, std::cout);
    } else if (ev->parsed()) {
      cmd_eval(rc, ckpt, data, out, std::cout);
    } else if (pr->parsed()) {
      cmd_predict(rc, ckpt, data, out, std::cout);
    } else if (sc->parsed()) {
      if (!inject.empty() && inject != "conv2d-backward") {
        throw ConfigError("unknown fault '" + inject + "'");
      }
      SelfCheckOptions opts;
      opts.inject_conv_fault = !inject.empty();
      const auto results = run_selfcheck(opts);
      std::size_t failed = 0;
      for (const auto & r : results) {
        std::cout << format_check(r) << "\n";
        failed += r.pass ? 0 : 1;
      }
      std::cout << (failed == 0 ? "selfcheck: all " + std::to_string(results.size()) + " checks passed\n"
                                : "selfcheck: " + std::to_string(failed) + " of " + std::to_string(results.size()) +
                                    " checks FAILED\n");
      return failed == 0 ? 0 : 3;
    }
    return 0;
  } catch (const ConfigError & e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const NumericFault & e) {
    std::cerr << "numeric fault: " << e.what() << "\n";
    return 3;
  } catch (const Error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mapstp::cli
