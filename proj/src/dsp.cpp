#include "deepemo/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binary_io.hpp"

namespace deepemo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPowerEpsilon = 1e-10;

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void SpectrogramConfig::validate() const {
  if (n_fft < 1 || !is_power_of_two(static_cast<size_t>(n_fft))) {
    fail(ErrorCode::NonPowerOfTwoLength, "n_fft must be a power of two, got " + std::to_string(n_fft));
  }
  if (hop <= 0 || hop > n_fft) {
    fail(ErrorCode::Usage, "hop must satisfy 0 < hop <= n_fft");
  }
  if (n_mels < 2) fail(ErrorCode::Usage, "n_mels must be at least 2");
  if (fmin < 0.0) fail(ErrorCode::NegativeFrequency, "fmin must be nonnegative");
  if (fmin >= fmax) fail(ErrorCode::InvalidBandRange, "fmin must be below fmax");
}

void fft_inplace(std::complex<double>* values, size_t n) {
  if (!is_power_of_two(n)) {
    fail(ErrorCode::NonPowerOfTwoLength, "fft length must be a power of two, got " + std::to_string(n));
  }
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(values[i], values[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> step(std::cos(angle), std::sin(angle));
    for (size_t base = 0; base < n; base += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> even = values[base + k];
        const std::complex<double> odd = values[base + k + len / 2] * w;
        values[base + k] = even + odd;
        values[base + k + len / 2] = even - odd;
        w *= step;
      }
    }
  }
}

ComplexBuffer fft(ComplexBuffer buf) {
  fft_inplace(buf.data(), buf.size());
  return buf;
}

ComplexBuffer ifft(ComplexBuffer buf) {
  for (auto& v : buf) v = std::conj(v);
  fft_inplace(buf.data(), buf.size());
  const double scale = 1.0 / static_cast<double>(buf.size());
  for (auto& v : buf) v = std::conj(v) * scale;
  return buf;
}

std::vector<double> hann_window(int n) {
  if (n < 1) fail(ErrorCode::Usage, "window length must be positive");
  std::vector<double> w(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    w[static_cast<size_t>(k)] = 0.5 - 0.5 * std::cos(2.0 * kPi * k / n);
  }
  return w;
}

int stft_frame_count(size_t signal_len, const SpectrogramConfig& config) {
  if (signal_len < static_cast<size_t>(config.n_fft)) {
    fail(ErrorCode::SignalShorterThanFrame,
         "signal of " + std::to_string(signal_len) + " samples is shorter than n_fft=" +
             std::to_string(config.n_fft));
  }
  return 1 + static_cast<int>((signal_len - static_cast<size_t>(config.n_fft)) /
                              static_cast<size_t>(config.hop));
}

std::vector<ComplexBuffer> stft(const AudioClip& clip, const SpectrogramConfig& config) {
  config.validate();
  const int n_frames = stft_frame_count(clip.samples.size(), config);
  const auto window = hann_window(config.n_fft);

  std::vector<ComplexBuffer> frames;
  frames.reserve(static_cast<size_t>(n_frames));
  ComplexBuffer frame(static_cast<size_t>(config.n_fft));
  for (int f = 0; f < n_frames; ++f) {
    const size_t start = static_cast<size_t>(f) * config.hop;
    for (int k = 0; k < config.n_fft; ++k) {
      frame[static_cast<size_t>(k)] = {clip.samples[start + k] * window[static_cast<size_t>(k)], 0.0};
    }
    fft_inplace(frame.data(), frame.size());
    frames.push_back(frame);
  }
  return frames;
}

double hz_to_mel(double hz) {
  if (hz < 0.0) fail(ErrorCode::NegativeFrequency, "frequency must be nonnegative");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (mel < 0.0) fail(ErrorCode::NegativeFrequency, "mel value must be nonnegative");
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> mel_edge_frequencies(const SpectrogramConfig& config) {
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(config.fmax);
  std::vector<double> edges(static_cast<size_t>(config.n_mels) + 2);
  for (size_t i = 0; i < edges.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(config.n_mels + 1);
    edges[i] = mel_to_hz(mel);
  }
  return edges;
}

FilterBank mel_filterbank(const SpectrogramConfig& config, int sample_rate) {
  config.validate();
  if (sample_rate <= 0) fail(ErrorCode::Usage, "sample rate must be positive");
  if (config.fmax > sample_rate / 2.0) {
    fail(ErrorCode::InvalidBandRange,
         "fmax above Nyquist: " + std::to_string(config.fmax) + " > " +
             std::to_string(sample_rate / 2.0));
  }

  const auto edges = mel_edge_frequencies(config);
  FilterBank fb;
  fb.n_mels = config.n_mels;
  fb.n_bins = config.n_fft / 2 + 1;
  fb.weights.assign(static_cast<size_t>(fb.n_mels) * fb.n_bins, 0.0);

  const double bin_hz = static_cast<double>(sample_rate) / config.n_fft;
  for (int m = 0; m < fb.n_mels; ++m) {
    const double lo = edges[static_cast<size_t>(m)];
    const double peak = edges[static_cast<size_t>(m) + 1];
    const double hi = edges[static_cast<size_t>(m) + 2];
    for (int k = 0; k < fb.n_bins; ++k) {
      const double f = bin_hz * k;
      double w = 0.0;
      if (f > lo && f < hi) {
        w = f <= peak ? (f - lo) / (peak - lo) : (hi - f) / (hi - peak);
      }
      fb.weights[static_cast<size_t>(m) * fb.n_bins + k] = w;
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const AudioClip& clip, const SpectrogramConfig& config) {
  const auto frames = stft(clip, config);
  const auto fb = mel_filterbank(config, clip.sample_rate);
  const int n_bins = fb.n_bins;

  MelSpectrogram spec;
  spec.n_mels = config.n_mels;
  spec.n_frames = static_cast<int>(frames.size());
  spec.sample_rate = clip.sample_rate;
  spec.config = config;
  spec.data.assign(static_cast<size_t>(spec.n_mels) * spec.n_frames, 0.0f);

  std::vector<double> power(static_cast<size_t>(n_bins));
  for (int t = 0; t < spec.n_frames; ++t) {
    const auto& frame = frames[static_cast<size_t>(t)];
    for (int k = 0; k < n_bins; ++k) {
      power[static_cast<size_t>(k)] = std::norm(frame[static_cast<size_t>(k)]);
    }
    for (int m = 0; m < spec.n_mels; ++m) {
      double acc = 0.0;
      const double* w = &fb.weights[static_cast<size_t>(m) * n_bins];
      for (int k = 0; k < n_bins; ++k) acc += w[k] * power[static_cast<size_t>(k)];
      double db = 10.0 * std::log10(acc + kPowerEpsilon);
      if (db < config.floor_db) db = config.floor_db;
      spec.data[static_cast<size_t>(m) * spec.n_frames + t] = static_cast<float>(db);
    }
  }
  return spec;
}

GrayImage render_image(const MelSpectrogram& spec) {
  if (spec.data.empty()) fail(ErrorCode::EmptyInput, "cannot render an empty spectrogram");
  GrayImage img;
  img.width = spec.n_frames;
  img.height = spec.n_mels;
  img.pixels.assign(static_cast<size_t>(img.width) * img.height, 0);

  const auto [min_it, max_it] = std::minmax_element(spec.data.begin(), spec.data.end());
  const double lo = *min_it;
  const double hi = *max_it;
  if (hi <= lo) return img;  // constant input maps to 0

  const double scale = 255.0 / (hi - lo);
  for (int m = 0; m < spec.n_mels; ++m) {
    const int row = spec.n_mels - 1 - m;  // band 0 at the bottom
    for (int t = 0; t < spec.n_frames; ++t) {
      const double v = (spec.at(m, t) - lo) * scale;
      img.pixels[static_cast<size_t>(row) * img.width + t] =
          static_cast<uint8_t>(std::lround(v));
    }
  }
  return img;
}

void write_pgm(const GrayImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open image for writing: " + path);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) fail(ErrorCode::Io, "failed writing image: " + path);
}

std::vector<uint8_t> encode_mspc(const MelSpectrogram& spec) {
  ByteWriter w;
  w.raw("MSPC", 4);
  w.u32(static_cast<uint32_t>(spec.n_mels));
  w.u32(static_cast<uint32_t>(spec.n_frames));
  w.u32(static_cast<uint32_t>(spec.sample_rate));
  for (float v : spec.data) w.f32(v);
  return std::move(w.bytes());
}

MelSpectrogram decode_mspc(const uint8_t* bytes, size_t len) {
  ByteReader r(bytes, len);
  if (r.remaining() < 16) fail(ErrorCode::BadMagic, "MSPC header too short");
  const uint8_t* magic = r.take(4);
  if (std::memcmp(magic, "MSPC", 4) != 0) fail(ErrorCode::BadMagic, "not an MSPC file");

  MelSpectrogram spec;
  spec.n_mels = static_cast<int>(r.u32());
  spec.n_frames = static_cast<int>(r.u32());
  spec.sample_rate = static_cast<int>(r.u32());
  if (spec.n_mels <= 0 || spec.n_frames <= 0) {
    fail(ErrorCode::MalformedHeader, "MSPC dimensions must be positive");
  }
  const size_t cells = static_cast<size_t>(spec.n_mels) * spec.n_frames;
  spec.data.resize(cells);
  for (size_t i = 0; i < cells; ++i) spec.data[i] = r.f32();
  spec.config.n_mels = spec.n_mels;
  return spec;
}

void save_mspc(const MelSpectrogram& spec, const std::string& path) {
  write_file_bytes(path, encode_mspc(spec));
}

MelSpectrogram load_mspc(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return decode_mspc(bytes.data(), bytes.size());
}

}  // namespace deepemo
