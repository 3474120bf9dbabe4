// Command-line front end. Everything goes through the C API in deepemo.h:
// flags are layered onto a config handle (defaults < environment < config
// file < flags) and each subcommand maps to one de_cmd_* call.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "deepemo.h"

namespace {

struct ConfigHandle {
  de_config* ptr = nullptr;
  ~ConfigHandle() { de_config_destroy(ptr); }
};

// Flag storage shared by all subcommands; only the parsed one is read.
struct Flags {
  std::string config_file;
  std::vector<std::pair<std::string, std::string*>> keyed;  // config key -> value storage
  std::vector<std::pair<std::string, bool*>> switches;      // config key -> flag storage
  std::vector<std::string> overrides;                       // raw key=value pairs

  std::string dataset_root, cache_dir, out_dir, checkpoint, arch, num_classes;
  std::string epochs, batch_size, lr, seed, train_fraction, k;
  bool deterministic = false, actor_disjoint = false, freeze_backbone = false;
};

void add_common_options(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_file, "Config file with key=value lines");
  auto opt = [cmd](const char* name, std::string& storage, const char* help) {
    cmd->add_option(name, storage, help);
  };
  opt("--dataset-root", flags.dataset_root, "Directory scanned for labeled .wav files");
  opt("--cache-dir", flags.cache_dir,
      "Feature cache directory (default: cache, or DEEPEMO_CACHE_DIR)");
  opt("--out-dir", flags.out_dir, "Output directory for checkpoints and reports (default: out)");
  opt("--checkpoint", flags.checkpoint, "Checkpoint to load (.demo)");
  opt("--arch", flags.arch, "Model architecture: resnet18 or resnet_tiny (default: resnet18)");
  opt("--num-classes", flags.num_classes, "Classifier output width (default: 8)");
  opt("--epochs", flags.epochs, "Training epochs (default: 42)");
  opt("--batch-size", flags.batch_size, "Minibatch size (default: 16)");
  opt("--lr", flags.lr, "Adam learning rate (default: 3e-5)");
  opt("--seed", flags.seed, "Seed for init, shuffling, and splits (default: 42)");
  opt("--train-fraction", flags.train_fraction, "Per-class training share (default: 0.8)");
  opt("--k", flags.k, "Classes listed by predict (default: 8)");
  cmd->add_flag("--deterministic", flags.deterministic,
                "Pin deterministic execution (runs are seeded and single-threaded either way)");
  cmd->add_flag("--actor-disjoint", flags.actor_disjoint,
                "Split whole actors instead of stratifying within classes");
  cmd->add_flag("--freeze-backbone", flags.freeze_backbone,
                "Train only the classification head");
  cmd->add_option("--set", flags.overrides, "Extra KEY=VALUE config override (repeatable)")
      ->type_name("KEY=VALUE");

  flags.keyed = {
      {"dataset_root", &flags.dataset_root},
      {"cache_dir", &flags.cache_dir},
      {"out_dir", &flags.out_dir},
      {"checkpoint", &flags.checkpoint},
      {"arch", &flags.arch},
      {"num_classes", &flags.num_classes},
      {"epochs", &flags.epochs},
      {"batch_size", &flags.batch_size},
      {"lr", &flags.lr},
      {"seed", &flags.seed},
      {"train_fraction", &flags.train_fraction},
      {"k", &flags.k},
  };
  flags.switches = {
      {"deterministic", &flags.deterministic},
      {"actor_disjoint", &flags.actor_disjoint},
      {"freeze_backbone", &flags.freeze_backbone},
  };
}

int fail_status(de_status status) {
  std::fprintf(stderr, "error: [%s] %s\n", de_status_name(status), de_last_error());
  return de_status_exit_code(status);
}

std::string key_to_flag(const std::string& key) {
  std::string flag = "--" + key;
  for (char& c : flag) {
    if (c == '_') c = '-';
  }
  return flag;
}

int apply_flags(const CLI::App* cmd, const Flags& flags, de_config* config) {
  if (de_status st = de_config_apply_env(config); st != DE_OK) return fail_status(st);
  if (cmd->count("--config") > 0) {
    if (de_status st = de_config_load_file(config, flags.config_file.c_str()); st != DE_OK) {
      return fail_status(st);
    }
  }
  for (const auto& [key, storage] : flags.keyed) {
    if (cmd->count(key_to_flag(key)) > 0) {
      if (de_status st = de_config_set(config, key.c_str(), storage->c_str()); st != DE_OK) {
        return fail_status(st);
      }
    }
  }
  for (const auto& [key, value] : flags.switches) {
    if (*value) {
      if (de_status st = de_config_set(config, key.c_str(), "true"); st != DE_OK) {
        return fail_status(st);
      }
    }
  }
  for (const std::string& entry : flags.overrides) {
    const size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: [Usage] --set expects KEY=VALUE, got '%s'\n", entry.c_str());
      return 1;
    }
    if (de_status st = de_config_set(config, entry.substr(0, eq).c_str(),
                                     entry.substr(eq + 1).c_str());
        st != DE_OK) {
      return fail_status(st);
    }
  }
  return -1;  // no error; continue
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech emotion classification over log-mel spectrograms"};
  app.require_subcommand(1);

  Flags flags;
  std::string eval_split = "val";
  std::string wav_path, out_image;

  CLI::App* features = app.add_subcommand("features", "Scan a dataset and cache spectrograms");
  CLI::App* train = app.add_subcommand("train", "Train a classifier on cached features");
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  CLI::App* predict = app.add_subcommand("predict", "Top-k class probabilities for one file");
  CLI::App* render = app.add_subcommand("render", "Write a spectrogram image for one file");

  for (CLI::App* cmd : {features, train, eval, predict, render}) {
    add_common_options(cmd, flags);
  }
  eval->add_option("split", eval_split, "Which split to evaluate: train or val (default: val)");
  predict->add_option("wav", wav_path, "Input WAV file")->required();
  render->add_option("wav", wav_path, "Input WAV file")->required();
  render->add_option("image", out_image, "Output PGM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  CLI::App* cmd = app.get_subcommands().front();
  ConfigHandle config;
  if (de_status st = de_config_create(&config.ptr); st != DE_OK) return fail_status(st);
  if (int rc = apply_flags(cmd, flags, config.ptr); rc >= 0) return rc;

  de_status st = DE_INTERNAL;
  if (cmd == features) {
    st = de_cmd_features(config.ptr);
  } else if (cmd == train) {
    st = de_cmd_train(config.ptr);
  } else if (cmd == eval) {
    st = de_cmd_eval(config.ptr, eval_split.c_str());
  } else if (cmd == predict) {
    st = de_cmd_predict(config.ptr, wav_path.c_str());
  } else if (cmd == render) {
    st = de_cmd_render(config.ptr, wav_path.c_str(), out_image.c_str());
  }
  return st == DE_OK ? 0 : fail_status(st);
}
