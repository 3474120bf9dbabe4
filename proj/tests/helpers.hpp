#pragma once

// Shared fixtures and oracles for the test binaries.

#include <complex>
#include <string>
#include <vector>

#include "deepemo/audio.hpp"
#include "deepemo/dsp.hpp"

namespace testutil {

/// Synthetic "emotion" tone for class i (0..7): fundamental 300 + 150*i Hz
/// with harmonics at amplitudes 0.6 / 0.25 / 0.1. Classes are far apart in
/// mel space, so a small model can separate them quickly. `detune` shifts
/// the fundamental by a relative factor (used to make per-actor variants).
deepemo::AudioClip make_tone(int class_index, double seconds = 1.0,
                             int rate = deepemo::kCanonicalSampleRate, double detune = 0.0);

/// Write a RAVDESS-style corpus under `dir`: `files_per_class` tone WAVs per
/// emotion, named 03-01-EE-01-01-01-AA.wav with actor ids 01, 02, ...
/// Returns the written paths.
std::vector<std::string> write_corpus(const std::string& dir, int files_per_class);

/// Self-deleting scratch directory.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const;

 private:
  std::string path_;
};

/// Brute-force O(N^2) DFT, the independent oracle the FFT is checked against.
deepemo::ComplexBuffer naive_dft(const deepemo::ComplexBuffer& x);

/// max_k |a_k - b_k| normalized by max_k |b_k| (error relative to the
/// spectrum's scale, so near-zero bins do not blow up the ratio).
double spectrum_rel_error(const deepemo::ComplexBuffer& a, const deepemo::ComplexBuffer& b);

}  // namespace testutil
