#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepemo/error.hpp"

namespace deepemo {

/// Canonical sample rate every clip is resampled to before feature
/// extraction. Halves the work of 44.1 kHz sources while keeping the
/// speech band intact.
inline constexpr int kCanonicalSampleRate = 22050;

/// Mono audio signal. Samples are dimensionless amplitudes; integer PCM
/// decodes into [-1, 1) by dividing by 2^(bits-1).
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Decode a RIFF/WAVE container. Accepts PCM integer (8/16/24/32-bit) and
/// 32-bit IEEE float, 1 or 2 channels. Stereo is downmixed by per-frame
/// arithmetic mean.
AudioClip decode_wav(const uint8_t* bytes, size_t len);
AudioClip decode_wav(const std::vector<uint8_t>& bytes);
AudioClip decode_wav_file(const std::string& path);

/// Write a 16-bit PCM mono WAV. Values are clamped to [-1, 1] and scaled by
/// 2^15, matching the decoder so that 16-bit material round-trips exactly.
void write_wav16(const AudioClip& clip, const std::string& path);
std::vector<uint8_t> encode_wav16(const AudioClip& clip);

/// Linear-interpolation resampler. Output length is
/// round(input_length * target_rate / source_rate). No anti-alias filter;
/// adequate for 44.1k -> 22.05k speech.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Scale so the peak magnitude is exactly 1.0. All-zero input is returned
/// unchanged. Idempotent.
AudioClip normalize_peak(const AudioClip& clip);

}  // namespace deepemo
