#include "helpers.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "deepemo/dataset.hpp"

namespace testutil {

namespace fs = std::filesystem;

deepemo::AudioClip make_tone(int class_index, double seconds, int rate, double detune) {
  const double fundamental = (300.0 + 150.0 * class_index) * (1.0 + detune);
  const size_t count = static_cast<size_t>(seconds * rate);
  deepemo::AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(count);
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double v = 0.6 * std::sin(two_pi * fundamental * t) +
                     0.25 * std::sin(two_pi * 2.0 * fundamental * t) +
                     0.1 * std::sin(two_pi * 3.0 * fundamental * t);
    clip.samples[i] = static_cast<float>(v);
  }
  return clip;
}

std::vector<std::string> write_corpus(const std::string& dir, int files_per_class) {
  fs::create_directories(dir);
  std::vector<std::string> paths;
  for (int emotion = 1; emotion <= deepemo::kNumEmotions; ++emotion) {
    for (int actor = 1; actor <= files_per_class; ++actor) {
      char name[40];
      std::snprintf(name, sizeof(name), "03-01-%02d-01-01-01-%02d.wav", emotion, actor);
      const std::string path = (fs::path(dir) / name).string();
      // Small per-actor detune so the two files of a class differ.
      const deepemo::AudioClip tone = make_tone(emotion - 1, 1.0,
                                                deepemo::kCanonicalSampleRate,
                                                0.005 * (actor - 1));
      deepemo::write_wav16(tone, path);
      paths.push_back(path);
    }
  }
  return paths;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path base = fs::temp_directory_path() /
                        ("deepemo_test_" + tag + "_" + std::to_string(counter.fetch_add(1)) +
                         "_" + std::to_string(static_cast<long>(::getpid())));
  fs::create_directories(base);
  path_ = base.string();
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const {
  return (fs::path(path_) / name).string();
}

deepemo::ComplexBuffer naive_dft(const deepemo::ComplexBuffer& x) {
  const size_t n = x.size();
  deepemo::ComplexBuffer out(n);
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (size_t j = 0; j < n; ++j) {
      const double angle = -two_pi * static_cast<double>(k) * static_cast<double>(j) /
                           static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

double spectrum_rel_error(const deepemo::ComplexBuffer& a, const deepemo::ComplexBuffer& b) {
  double max_diff = 0.0, max_mag = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(a[i] - b[i]));
    max_mag = std::max(max_mag, std::abs(b[i]));
  }
  return max_mag > 0.0 ? max_diff / max_mag : max_diff;
}

}  // namespace testutil
