#include "deepemo/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "deepemo/audio.hpp"
#include "deepemo/hash.hpp"
#include "deepemo/rng.hpp"

namespace fs = std::filesystem;

namespace deepemo {

namespace {

constexpr std::array<const char*, kNumEmotions> kEmotionNames = {
    "neutral", "calm", "happy", "sad", "angry", "fearful", "disgust", "surprised"};

bool is_two_digits(const std::string& s) {
  return s.size() == 2 && std::isdigit(static_cast<unsigned char>(s[0])) &&
         std::isdigit(static_cast<unsigned char>(s[1]));
}

}  // namespace

const char* emotion_name(Emotion e) {
  return kEmotionNames[static_cast<size_t>(emotion_code(e) - 1)];
}

Emotion emotion_from_code(int code) {
  if (code < 1 || code > kNumEmotions) {
    fail(ErrorCode::UnknownEmotionCode, "emotion code out of range 01..08: " + std::to_string(code));
  }
  return static_cast<Emotion>(code);
}

std::optional<Emotion> emotion_from_name(const std::string& name) {
  for (int i = 0; i < kNumEmotions; ++i) {
    if (name == kEmotionNames[static_cast<size_t>(i)]) return static_cast<Emotion>(i + 1);
  }
  return std::nullopt;
}

ParsedName parse_ravdess_filename(const std::string& name) {
  // Expect ^\d{2}(-\d{2}){6}\.wav$
  if (name.size() != 24 || name.substr(20) != ".wav") {
    fail(ErrorCode::MalformedFilename, "not a 7-field RAVDESS name: " + name);
  }
  std::array<std::string, 7> fields;
  for (int i = 0; i < 7; ++i) {
    const size_t off = static_cast<size_t>(i) * 3;
    fields[static_cast<size_t>(i)] = name.substr(off, 2);
    if (!is_two_digits(fields[static_cast<size_t>(i)])) {
      fail(ErrorCode::MalformedFilename, "field " + std::to_string(i + 1) + " is not two digits: " + name);
    }
    if (i < 6 && name[off + 2] != '-') {
      fail(ErrorCode::MalformedFilename, "missing dash after field " + std::to_string(i + 1) + ": " + name);
    }
  }
  ParsedName parsed{};
  parsed.label = emotion_from_code(std::stoi(fields[2]));
  parsed.actor_id = std::stoi(fields[6]);
  return parsed;
}

std::string format_ravdess_filename(Emotion label, int actor_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "03-01-%02d-01-01-01-%02d.wav", emotion_code(label), actor_id);
  return buf;
}

ScanResult scan_dataset(const std::string& root) {
  if (!fs::exists(root) || !fs::is_directory(root)) {
    fail(ErrorCode::MissingDirectory, "dataset root does not exist: " + root);
  }

  ScanResult result;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto& path = entry.path();
    if (path.extension() != ".wav") continue;
    try {
      const ParsedName parsed = parse_ravdess_filename(path.filename().string());
      result.examples.push_back({path.string(), parsed.label, parsed.actor_id, std::nullopt});
    } catch (const Error& e) {
      result.skipped.push_back({path.string(), e.what()});
    }
  }
  std::sort(result.examples.begin(), result.examples.end(),
            [](const LabeledExample& a, const LabeledExample& b) { return a.path < b.path; });
  std::sort(result.skipped.begin(), result.skipped.end(),
            [](const SkipRecord& a, const SkipRecord& b) { return a.path < b.path; });
  if (result.examples.empty()) {
    fail(ErrorCode::EmptyDataset, "no parsable .wav files under " + root);
  }
  return result;
}

DatasetSplit stratified_split(const std::vector<LabeledExample>& examples,
                              const SplitOptions& options) {
  if (examples.empty()) fail(ErrorCode::EmptyInput, "cannot split an empty example list");
  if (options.train_fraction <= 0.0 || options.train_fraction > 1.0) {
    fail(ErrorCode::Usage, "train_fraction must be in (0, 1]");
  }

  DatasetSplit split;
  split.seed = options.seed;
  Rng rng(options.seed);

  if (options.actor_disjoint) {
    std::set<int> actor_set;
    for (const auto& ex : examples) actor_set.insert(ex.actor_id);
    std::vector<int> actors(actor_set.begin(), actor_set.end());
    rng.shuffle(actors);
    const auto n_train = static_cast<size_t>(
        std::ceil(options.train_fraction * static_cast<double>(actors.size())));
    std::set<int> train_actors(actors.begin(), actors.begin() + static_cast<long>(n_train));
    for (const auto& ex : examples) {
      (train_actors.count(ex.actor_id) ? split.train : split.validation).push_back(ex);
    }
    return split;
  }

  // File-level stratified split: classes processed in code order.
  std::map<int, std::vector<LabeledExample>> by_class;
  for (const auto& ex : examples) by_class[emotion_code(ex.label)].push_back(ex);
  for (auto& [code, members] : by_class) {
    rng.shuffle(members);
    const auto n_train = static_cast<size_t>(
        std::ceil(options.train_fraction * static_cast<double>(members.size())));
    for (size_t i = 0; i < members.size(); ++i) {
      (i < n_train ? split.train : split.validation).push_back(members[i]);
    }
  }
  return split;
}

uint64_t feature_cache_key(const std::string& path, const FeatureCacheConfig& config) {
  std::ostringstream os;
  os << path << "|n_fft=" << config.spectrogram.n_fft << "|hop=" << config.spectrogram.hop
     << "|n_mels=" << config.spectrogram.n_mels << "|fmin=" << config.spectrogram.fmin
     << "|fmax=" << config.spectrogram.fmax << "|floor_db=" << config.spectrogram.floor_db
     << "|rate=" << config.target_sample_rate;
  return fnv1a64(os.str());
}

std::string feature_cache_filename(const std::string& path, const FeatureCacheConfig& config) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx.mspc",
                static_cast<unsigned long long>(feature_cache_key(path, config)));
  return buf;
}

CacheReport build_feature_cache(std::vector<LabeledExample>& examples,
                                const FeatureCacheConfig& config) {
  if (examples.empty()) fail(ErrorCode::EmptyInput, "no examples to cache");
  config.spectrogram.validate();
  fs::create_directories(config.cache_dir);

  CacheReport report;
  for (auto& ex : examples) {
    const fs::path cache_path = fs::path(config.cache_dir) / feature_cache_filename(ex.path, config);
    try {
      if (fs::exists(cache_path)) {
        ex.features = load_mspc(cache_path.string());
        ex.features->config = config.spectrogram;
        ++report.cached;
        continue;
      }
      AudioClip clip = decode_wav_file(ex.path);
      clip = resample(clip, config.target_sample_rate);
      clip = normalize_peak(clip);
      MelSpectrogram spec = mel_spectrogram(clip, config.spectrogram);
      save_mspc(spec, cache_path.string());
      ex.features = std::move(spec);
      ++report.computed;
    } catch (const Error& e) {
      report.failures.push_back({ex.path, std::string(error_code_name(e.code())) + ": " + e.what()});
    }
  }
  if (report.computed + report.cached == 0) {
    fail(ErrorCode::EmptyDataset, "feature extraction failed for every file");
  }
  return report;
}

void write_split_manifest(const DatasetSplit& split, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open manifest for writing: " + path);
  out << "path,label_code,label_name,actor,split\n";
  auto write_rows = [&out](const std::vector<LabeledExample>& rows, const char* tag) {
    std::vector<const LabeledExample*> sorted;
    sorted.reserve(rows.size());
    for (const auto& ex : rows) sorted.push_back(&ex);
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledExample* a, const LabeledExample* b) { return a->path < b->path; });
    for (const auto* ex : sorted) {
      out << ex->path << "," << emotion_code(ex->label) << "," << emotion_name(ex->label) << ","
          << ex->actor_id << "," << tag << "\n";
    }
  };
  write_rows(split.train, "train");
  write_rows(split.validation, "validation");
  if (!out) fail(ErrorCode::Io, "failed writing manifest: " + path);
}

}  // namespace deepemo
