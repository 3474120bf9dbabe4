#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "deepemo/dsp.hpp"
#include "deepemo/error.hpp"

namespace deepemo {

/// Flat key=value settings with layered precedence: built-in defaults,
/// then the DEEPEMO_CACHE_DIR environment variable, then a config file,
/// then explicit set() calls (command-line flags). Unknown keys are
/// rejected so typos surface as usage errors.
class Config {
 public:
  Config();

  void apply_env();
  void apply_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Validated, fully resolved settings for one command invocation.
struct RunConfig {
  std::string dataset_root;
  std::string cache_dir;
  std::string out_dir;
  std::string checkpoint;

  SpectrogramConfig spectrogram;  // fmax already resolved ("auto" -> rate/2)
  int sample_rate = 22050;

  std::string arch = "resnet18";
  int num_classes = 8;
  bool freeze_backbone = false;

  int epochs = 42;
  int batch_size = 16;
  double lr = 3e-5;
  uint64_t seed = 42;
  double train_fraction = 0.8;
  bool actor_disjoint = false;
  bool deterministic = false;

  int k = 8;
  bool imagenet_norm = false;

  static RunConfig resolve(const Config& config);
};

/// Exit-code contract: 0 success, 1 usage error, 2 data/file error,
/// 3 numerical abort.
int exit_code_for(ErrorCode code);

int cmd_features(const RunConfig& rc, std::ostream& out);
int cmd_train(const RunConfig& rc, std::ostream& out);
int cmd_eval(const RunConfig& rc, const std::string& split_name, std::ostream& out);
int cmd_predict(const RunConfig& rc, const std::string& wav_path, std::ostream& out);
int cmd_render(const RunConfig& rc, const std::string& wav_path, const std::string& out_image,
               std::ostream& out);

}  // namespace deepemo
