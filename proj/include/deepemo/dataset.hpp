#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deepemo/dsp.hpp"
#include "deepemo/error.hpp"

namespace deepemo {

inline constexpr int kNumEmotions = 8;

/// Emotion categories in the RAVDESS code order (1=neutral .. 8=surprised).
enum class Emotion : int {
  Neutral = 1,
  Calm = 2,
  Happy = 3,
  Sad = 4,
  Angry = 5,
  Fearful = 6,
  Disgust = 7,
  Surprised = 8,
};

const char* emotion_name(Emotion e);
Emotion emotion_from_code(int code);
std::optional<Emotion> emotion_from_name(const std::string& name);
inline int emotion_code(Emotion e) { return static_cast<int>(e); }

struct LabeledExample {
  std::string path;
  Emotion label = Emotion::Neutral;
  int actor_id = 0;
  std::optional<MelSpectrogram> features;
};

struct SkipRecord {
  std::string path;
  std::string reason;
};

struct ScanResult {
  std::vector<LabeledExample> examples;  // sorted by path
  std::vector<SkipRecord> skipped;
};

struct DatasetSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> validation;
  uint64_t seed = 0;
};

struct SplitOptions {
  double train_fraction = 0.8;
  uint64_t seed = 0;
  bool actor_disjoint = false;
};

/// RAVDESS filename convention: seven dash-separated two-digit fields,
/// "MM-VV-EE-II-SS-RR-AA.wav". Field 3 is the emotion code, field 7 the
/// actor id.
struct ParsedName {
  Emotion label;
  int actor_id;
};
ParsedName parse_ravdess_filename(const std::string& name);

/// Format (emotion, actor) back into a canonical filename; inverse of
/// parse_ravdess_filename for round-trip checks and fixture generation.
std::string format_ravdess_filename(Emotion label, int actor_id);

/// Recursive scan for .wav files with parsable names. Unparsable .wav names
/// are reported, not fatal. Output is path-sorted for determinism.
ScanResult scan_dataset(const std::string& root);

/// Seeded per-class shuffle; ceil(train_fraction * n_c) of each class go to
/// train. With actor_disjoint, whole actors are assigned to one side instead.
DatasetSplit stratified_split(const std::vector<LabeledExample>& examples,
                              const SplitOptions& options);

struct CacheFailure {
  std::string path;
  std::string reason;
};

struct CacheReport {
  int computed = 0;
  int cached = 0;
  std::vector<CacheFailure> failures;
};

struct FeatureCacheConfig {
  SpectrogramConfig spectrogram;
  int target_sample_rate = kCanonicalSampleRate;
  std::string cache_dir;
};

/// Cache key: 64-bit FNV-1a over the example path plus the serialized
/// extraction config. Changing any config field invalidates every entry.
uint64_t feature_cache_key(const std::string& path, const FeatureCacheConfig& config);
std::string feature_cache_filename(const std::string& path, const FeatureCacheConfig& config);

/// Extract (or load cached) mel spectrograms for every example. Per-file
/// failures are collected in the report; the call fails only when no file
/// succeeds. Examples that failed keep an empty features field.
CacheReport build_feature_cache(std::vector<LabeledExample>& examples,
                                const FeatureCacheConfig& config);

/// Split manifest rows: path,label_code,label_name,actor,split.
void write_split_manifest(const DatasetSplit& split, const std::string& path);

}  // namespace deepemo
