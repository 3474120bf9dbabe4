#include "deepemo/commands.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "deepemo/checkpoint.hpp"
#include "deepemo/dataset.hpp"
#include "deepemo/train.hpp"

namespace deepemo {
namespace {

namespace fs = std::filesystem;

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> defaults = {
      {"dataset_root", ""},
      {"cache_dir", "cache"},
      {"out_dir", "out"},
      {"checkpoint", ""},
      {"arch", "resnet18"},
      {"num_classes", "8"},
      {"freeze_backbone", "false"},
      {"epochs", "42"},
      {"batch_size", "16"},
      {"lr", "3e-5"},
      {"seed", "42"},
      {"train_fraction", "0.8"},
      {"actor_disjoint", "false"},
      {"deterministic", "false"},
      {"k", "8"},
      {"imagenet_norm", "false"},
      {"sample_rate", "22050"},
      {"n_fft", "1024"},
      {"hop", "256"},
      {"n_mels", "128"},
      {"fmin", "0"},
      {"fmax", "auto"},
      {"floor_db", "-80"},
  };
  return defaults;
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Scan the dataset, extract or load cached features, and report every file
// that was dropped along the way. Returns only examples with features.
std::vector<LabeledExample> prepare_examples(const RunConfig& rc, std::ostream& out,
                                             CacheReport* report_out) {
  if (rc.dataset_root.empty()) fail(ErrorCode::Usage, "dataset_root is required");
  ScanResult scan = scan_dataset(rc.dataset_root);
  for (const auto& skip : scan.skipped) {
    out << "SKIP " << skip.path << ": " << skip.reason << "\n";
  }

  FeatureCacheConfig cache{rc.spectrogram, rc.sample_rate, rc.cache_dir};
  CacheReport report = build_feature_cache(scan.examples, cache);
  for (const auto& failure : report.failures) {
    out << "SKIP " << failure.path << ": " << failure.reason << "\n";
  }
  if (report_out) *report_out = report;

  std::vector<LabeledExample> ready;
  ready.reserve(scan.examples.size());
  for (auto& ex : scan.examples) {
    if (ex.features) ready.push_back(std::move(ex));
  }
  return ready;
}

// Build a model shaped like the checkpoint and fill it. The requested arch
// is a fallback for checkpoints without recorded metadata.
ResNet<float> model_from_checkpoint(const Checkpoint& ckpt, const RunConfig& rc) {
  const std::string arch = ckpt.arch.empty() ? rc.arch : ckpt.arch;
  const int classes = ckpt.num_classes > 0 ? ckpt.num_classes : rc.num_classes;
  ResNet<float> model(ArchSpec::named(arch), classes, rc.seed);
  load_into(model, ckpt, false);
  return model;
}

}  // namespace

Config::Config() : values_(default_values()) {}

void Config::apply_env() {
  if (const char* dir = std::getenv("DEEPEMO_CACHE_DIR"); dir && *dir) {
    values_["cache_dir"] = dir;
  }
}

void Config::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::Usage, path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

void Config::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::Usage, "unknown config key '" + key + "'");
  it->second = value;
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::Usage, "unknown config key '" + key + "'");
  return it->second;
}

int Config::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t used = 0;
    const int result = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return result;
  } catch (const std::exception&) {
    fail(ErrorCode::Usage, "config key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t used = 0;
    const double result = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return result;
  } catch (const std::exception&) {
    fail(ErrorCode::Usage, "config key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorCode::Usage, "config key '" + key + "' expects true or false, got '" + v + "'");
}

RunConfig RunConfig::resolve(const Config& config) {
  RunConfig rc;
  rc.dataset_root = config.get("dataset_root");
  rc.cache_dir = config.get("cache_dir");
  rc.out_dir = config.get("out_dir");
  rc.checkpoint = config.get("checkpoint");

  rc.sample_rate = config.get_int("sample_rate");
  if (rc.sample_rate < 1) fail(ErrorCode::Usage, "sample_rate must be positive");

  rc.spectrogram.n_fft = config.get_int("n_fft");
  rc.spectrogram.hop = config.get_int("hop");
  rc.spectrogram.n_mels = config.get_int("n_mels");
  rc.spectrogram.fmin = config.get_double("fmin");
  rc.spectrogram.fmax = config.get("fmax") == "auto" ? rc.sample_rate / 2.0
                                                     : config.get_double("fmax");
  rc.spectrogram.floor_db = config.get_double("floor_db");
  rc.spectrogram.validate();

  rc.arch = config.get("arch");
  rc.num_classes = config.get_int("num_classes");
  if (rc.num_classes < 1) fail(ErrorCode::Usage, "num_classes must be >= 1");
  rc.freeze_backbone = config.get_bool("freeze_backbone");

  rc.epochs = config.get_int("epochs");
  if (rc.epochs < 0) fail(ErrorCode::Usage, "epochs must be >= 0");
  rc.batch_size = config.get_int("batch_size");
  if (rc.batch_size < 1) fail(ErrorCode::Usage, "batch_size must be >= 1");
  rc.lr = config.get_double("lr");
  if (rc.lr <= 0.0) fail(ErrorCode::Usage, "lr must be > 0");
  rc.seed = static_cast<uint64_t>(config.get_double("seed"));
  rc.train_fraction = config.get_double("train_fraction");
  if (!(rc.train_fraction > 0.0) || rc.train_fraction > 1.0) {
    fail(ErrorCode::Usage, "train_fraction must be in (0, 1]");
  }
  rc.actor_disjoint = config.get_bool("actor_disjoint");
  rc.deterministic = config.get_bool("deterministic");

  rc.k = config.get_int("k");
  if (rc.k < 1) fail(ErrorCode::Usage, "k must be >= 1");
  rc.imagenet_norm = config.get_bool("imagenet_norm");
  return rc;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
      return 1;
    case ErrorCode::NonFiniteLoss:
      return 3;
    default:
      return 2;
  }
}

int cmd_features(const RunConfig& rc, std::ostream& out) {
  CacheReport report;
  std::vector<LabeledExample> examples = prepare_examples(rc, out, &report);

  DatasetSplit split =
      stratified_split(examples, {rc.train_fraction, rc.seed, rc.actor_disjoint});
  const std::string manifest_path = (fs::path(rc.cache_dir) / "manifest.csv").string();
  write_split_manifest(split, manifest_path);

  for (int code = 1; code <= kNumEmotions; ++code) {
    const Emotion e = emotion_from_code(code);
    size_t count = 0;
    for (const auto& ex : examples) {
      if (ex.label == e) ++count;
    }
    out << "class " << emotion_name(e) << ": " << count << "\n";
  }
  out << "computed " << report.computed << ", cached " << report.cached << "\n";
  out << "manifest " << manifest_path << "\n";
  return 0;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  std::vector<LabeledExample> examples = prepare_examples(rc, out, nullptr);
  DatasetSplit split =
      stratified_split(examples, {rc.train_fraction, rc.seed, rc.actor_disjoint});

  ResNet<float> model(ArchSpec::named(rc.arch), rc.num_classes, rc.seed);
  if (!rc.checkpoint.empty()) {
    const Checkpoint ckpt = load_checkpoint(rc.checkpoint);
    if (!ckpt.arch.empty() && ckpt.arch != rc.arch) {
      fail(ErrorCode::Usage, "checkpoint architecture '" + ckpt.arch +
                                 "' does not match requested '" + rc.arch + "'");
    }
    if (ckpt.num_classes == rc.num_classes) {
      load_into(model, ckpt, false);
      out << "loaded checkpoint " << rc.checkpoint << "\n";
    } else {
      load_into(model, ckpt, true);
      model.replace_final_layer(rc.num_classes, rc.seed);
      out << "loaded backbone from " << rc.checkpoint << ", new " << model.arch().feature_dim()
          << "x" << rc.num_classes << " head\n";
    }
  }

  fs::create_directories(rc.out_dir);
  TrainConfig tc;
  tc.epochs = rc.epochs;
  tc.batch_size = rc.batch_size;
  tc.lr = rc.lr;
  tc.seed = rc.seed;
  tc.freeze_backbone = rc.freeze_backbone;
  tc.imagenet_norm = rc.imagenet_norm;

  TrainHooks hooks;
  hooks.checkpoint_last_path = (fs::path(rc.out_dir) / "checkpoint_last.demo").string();
  hooks.checkpoint_best_path = (fs::path(rc.out_dir) / "checkpoint_best.demo").string();
  hooks.on_epoch = [&out](const EpochMetrics& m) {
    out << "epoch " << m.epoch << " train_acc " << format6(m.train_accuracy) << " loss "
        << format6(m.mean_loss) << " val_acc " << format6(m.val_accuracy) << "\n";
  };

  const std::vector<EpochMetrics> metrics =
      train(model, split.train, split.validation, tc, hooks);

  const std::string csv_path = (fs::path(rc.out_dir) / "metrics.csv").string();
  write_text_file(csv_path, format_metrics_csv(metrics));
  out << "wrote " << csv_path << "\n";
  return 0;
}

int cmd_eval(const RunConfig& rc, const std::string& split_name, std::ostream& out) {
  if (split_name != "train" && split_name != "val") {
    fail(ErrorCode::Usage, "split must be 'train' or 'val', got '" + split_name + "'");
  }
  if (rc.checkpoint.empty()) fail(ErrorCode::Usage, "eval requires a checkpoint path");

  std::vector<LabeledExample> examples = prepare_examples(rc, out, nullptr);
  DatasetSplit split =
      stratified_split(examples, {rc.train_fraction, rc.seed, rc.actor_disjoint});
  const std::vector<LabeledExample>& subset =
      split_name == "train" ? split.train : split.validation;

  ResNet<float> model = model_from_checkpoint(load_checkpoint(rc.checkpoint), rc);
  const EvalResult result = evaluate(model, subset, rc.batch_size, rc.imagenet_norm);

  fs::create_directories(rc.out_dir);
  const std::string summary_path =
      (fs::path(rc.out_dir) / ("eval_" + split_name + ".txt")).string();
  write_text_file(summary_path, "examples=" + std::to_string(subset.size()) + "\naccuracy=" +
                                    format6(result.accuracy) + "\nmean_loss=" +
                                    format6(result.mean_loss) + "\n");
  const std::string confusion_path =
      (fs::path(rc.out_dir) / ("confusion_" + split_name + ".csv")).string();
  write_text_file(confusion_path, format_confusion_csv(result.confusion, model.num_classes()));

  out << "split " << split_name << " accuracy " << format6(result.accuracy) << " mean_loss "
      << format6(result.mean_loss) << "\n";
  out << "wrote " << summary_path << "\n";
  out << "wrote " << confusion_path << "\n";
  return 0;
}

int cmd_predict(const RunConfig& rc, const std::string& wav_path, std::ostream& out) {
  if (rc.checkpoint.empty()) fail(ErrorCode::Usage, "predict requires a checkpoint path");
  ResNet<float> model = model_from_checkpoint(load_checkpoint(rc.checkpoint), rc);

  const AudioClip clip = decode_wav_file(wav_path);
  fs::create_directories(rc.out_dir);
  const std::string render_path =
      (fs::path(rc.out_dir) / (fs::path(wav_path).stem().string() + "_spectrogram.pgm"))
          .string();

  const TopKReport report = predict_topk(model, clip, rc.k, rc.spectrogram, rc.sample_rate,
                                         rc.imagenet_norm, wav_path, render_path);
  out << format_topk_report(report);
  return 0;
}

int cmd_render(const RunConfig& rc, const std::string& wav_path, const std::string& out_image,
               std::ostream& out) {
  const AudioClip clip = decode_wav_file(wav_path);
  const AudioClip canonical = normalize_peak(resample(clip, rc.sample_rate));
  const MelSpectrogram spec = mel_spectrogram(canonical, rc.spectrogram);
  write_pgm(render_image(spec), out_image);
  out << "wrote " << out_image << " (" << spec.n_frames << "x" << spec.n_mels << ")\n";
  return 0;
}

}  // namespace deepemo
