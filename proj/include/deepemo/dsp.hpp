#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "deepemo/audio.hpp"
#include "deepemo/error.hpp"

namespace deepemo {

using ComplexBuffer = std::vector<std::complex<double>>;

/// STFT / mel filterbank parameters. Defaults are common speech-analysis
/// settings; every field is overridable from the CLI.
struct SpectrogramConfig {
  int n_fft = 1024;        // frame length, must be a power of two
  int hop = 256;           // samples between frame starts
  int n_mels = 128;        // mel bands
  double fmin = 0.0;       // Hz
  double fmax = 11025.0;   // Hz, at most sample_rate / 2
  double floor_db = -80.0; // lower clamp on log-power cells

  void validate() const;
};

/// Log-mel energy grid: data[m * n_frames + t] is band m at frame t, in dB,
/// clamped below at config.floor_db.
struct MelSpectrogram {
  std::vector<float> data;  // n_mels rows x n_frames columns, row-major
  int n_mels = 0;
  int n_frames = 0;
  int sample_rate = 0;
  SpectrogramConfig config;

  float at(int mel, int frame) const {
    return data[static_cast<size_t>(mel) * n_frames + frame];
  }
};

/// 8-bit grayscale raster, rows top to bottom.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;
};

/// Unnormalized forward DFT X[k] = sum_n x[n] e^(-2*pi*i*k*n/N) via
/// iterative radix-2 with bit-reversal. Length must be a power of two.
void fft_inplace(std::complex<double>* values, size_t n);
ComplexBuffer fft(ComplexBuffer buf);

/// Inverse transform via conjugate-fft-conjugate, scaled by 1/N.
ComplexBuffer ifft(ComplexBuffer buf);

/// Periodic Hann window: w[k] = 0.5 - 0.5*cos(2*pi*k/n).
std::vector<double> hann_window(int n);

/// Windowed frames FFT'd in place. Frame f covers samples
/// [f*hop, f*hop + n_fft); no centering or padding, so the frame count is
/// exactly 1 + floor((len - n_fft) / hop).
std::vector<ComplexBuffer> stft(const AudioClip& clip, const SpectrogramConfig& config);

int stft_frame_count(size_t signal_len, const SpectrogramConfig& config);

/// HTK mel scale: m = 2595 * log10(1 + f/700), and its exact inverse.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filterbank with peak amplitude 1.0. Center frequencies sit
/// on n_mels+2 equally spaced mel points between fmin and fmax; filter i
/// rises over [edge i, edge i+1] and falls over [edge i+1, edge i+2],
/// evaluated at the FFT bin frequencies k * sample_rate / n_fft.
struct FilterBank {
  int n_mels = 0;
  int n_bins = 0;                // n_fft/2 + 1
  std::vector<double> weights;   // n_mels x n_bins, row-major

  double at(int mel, int bin) const {
    return weights[static_cast<size_t>(mel) * n_bins + bin];
  }
};

FilterBank mel_filterbank(const SpectrogramConfig& config, int sample_rate);

/// Mel edge frequencies in Hz (n_mels + 2 points), exposed for tests and
/// band lookup.
std::vector<double> mel_edge_frequencies(const SpectrogramConfig& config);

/// Full feature pipeline: |STFT|^2 -> filterbank -> 10*log10(p + 1e-10),
/// clamped below at floor_db.
MelSpectrogram mel_spectrogram(const AudioClip& clip, const SpectrogramConfig& config);

/// Min-max render to 0..255, band 0 at the image bottom. A constant
/// spectrogram maps to all-zero pixels.
GrayImage render_image(const MelSpectrogram& spec);

/// Binary PGM (P5, maxval 255).
void write_pgm(const GrayImage& image, const std::string& path);

/// MSPC container: magic "MSPC", u32 n_mels, u32 n_frames, u32 sample_rate,
/// then row-major little-endian f32 data.
void save_mspc(const MelSpectrogram& spec, const std::string& path);
MelSpectrogram load_mspc(const std::string& path);
std::vector<uint8_t> encode_mspc(const MelSpectrogram& spec);
MelSpectrogram decode_mspc(const uint8_t* bytes, size_t len);

}  // namespace deepemo
