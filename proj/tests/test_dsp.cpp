#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <vector>

#include "deepemo/dsp.hpp"
#include "deepemo/error.hpp"
#include "deepemo/rng.hpp"
#include "helpers.hpp"

using deepemo::ComplexBuffer;
using deepemo::Error;
using deepemo::ErrorCode;
using deepemo::MelSpectrogram;
using deepemo::SpectrogramConfig;

namespace {

constexpr double kPi = 3.14159265358979323846;

ComplexBuffer random_signal(size_t n, uint64_t seed) {
  deepemo::Rng rng(seed);
  ComplexBuffer buf(n);
  for (auto& v : buf) v = {rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0};
  return buf;
}

deepemo::AudioClip sine_clip(double hz, int rate, size_t len) {
  deepemo::AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(len);
  for (size_t i = 0; i < len; ++i) {
    clip.samples[i] = static_cast<float>(std::sin(2.0 * kPi * hz * i / rate));
  }
  return clip;
}

}  // namespace

TEST_CASE("fft matches a direct DFT evaluation") {
  for (size_t n : {2u, 4u, 8u, 32u, 128u, 512u, 1024u}) {
    const ComplexBuffer x = random_signal(n, 1000 + n);
    const ComplexBuffer got = deepemo::fft(x);
    const ComplexBuffer want = testutil::naive_dft(x);
    CHECK_MESSAGE(testutil::spectrum_rel_error(got, want) < 1e-9, "n = " << n);
  }
}

TEST_CASE("fft of a unit impulse is flat") {
  ComplexBuffer x(4);
  x[0] = 1.0;
  const ComplexBuffer y = deepemo::fft(std::move(x));
  for (const auto& v : y) {
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.imag() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("fft of zeros is zeros") {
  const ComplexBuffer y = deepemo::fft(ComplexBuffer(64));
  for (const auto& v : y) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("fft rejects non-power-of-two lengths") {
  CHECK_THROWS_AS(deepemo::fft(ComplexBuffer(3)), Error);
  CHECK_THROWS_AS(deepemo::fft(ComplexBuffer(0)), Error);
  try {
    deepemo::fft(ComplexBuffer(12));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPowerOfTwoLength);
  }
}

TEST_CASE("fft preserves energy (Parseval)") {
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 256;
    const ComplexBuffer x = random_signal(n, 7000 + trial);
    const ComplexBuffer y = deepemo::fft(x);
    double time_energy = 0.0, freq_energy = 0.0;
    for (const auto& v : x) time_energy += std::norm(v);
    for (const auto& v : y) freq_energy += std::norm(v);
    freq_energy /= static_cast<double>(n);
    CHECK(std::abs(time_energy - freq_energy) / time_energy < 1e-9);
  }
}

TEST_CASE("ifft inverts fft") {
  const ComplexBuffer x = random_signal(512, 99);
  const ComplexBuffer back = deepemo::ifft(deepemo::fft(x));
  double max_err = 0.0;
  for (size_t i = 0; i < x.size(); ++i) max_err = std::max(max_err, std::abs(back[i] - x[i]));
  CHECK(max_err < 1e-12);
}

TEST_CASE("periodic Hann window values") {
  const std::vector<double> w4 = deepemo::hann_window(4);
  REQUIRE(w4.size() == 4);
  CHECK(w4[0] == doctest::Approx(0.0));
  CHECK(w4[1] == doctest::Approx(0.5));
  CHECK(w4[2] == doctest::Approx(1.0));
  CHECK(w4[3] == doctest::Approx(0.5));

  const std::vector<double> w8 = deepemo::hann_window(8);
  CHECK(w8[0] == doctest::Approx(0.0));
  CHECK(w8[2] == doctest::Approx(0.5));
  CHECK(w8[4] == doctest::Approx(1.0));

  // periodic form: w[0] is always zero, and no sample reaches 1 twice
  for (int n : {2, 16, 1024}) {
    const std::vector<double> w = deepemo::hann_window(n);
    CHECK(w[0] == doctest::Approx(0.0));
    CHECK(*std::max_element(w.begin(), w.end()) <= 1.0);
  }
}

TEST_CASE("stft frame count is 1 + floor((len - n_fft) / hop)") {
  SpectrogramConfig cfg;
  cfg.n_fft = 512;
  cfg.hop = 256;
  CHECK(deepemo::stft_frame_count(1024, cfg) == 3);
  CHECK(deepemo::stft_frame_count(512, cfg) == 1);
  CHECK(deepemo::stft_frame_count(767, cfg) == 1);
  CHECK(deepemo::stft_frame_count(768, cfg) == 2);

  deepemo::AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(1024, 0.0f);
  CHECK(deepemo::stft(clip, cfg).size() == 3);
}

TEST_CASE("stft rejects clips shorter than one frame") {
  SpectrogramConfig cfg;
  cfg.n_fft = 512;
  deepemo::AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(511, 0.1f);
  try {
    deepemo::stft(clip, cfg);
    FAIL("expected stft to throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SignalShorterThanFrame);
  }
}

TEST_CASE("stft of a bin-centered sine peaks at that bin") {
  SpectrogramConfig cfg;
  cfg.n_fft = 1024;
  cfg.hop = 256;
  const int rate = 22050;
  const int k = 40;  // frequency k * rate / n_fft sits exactly on bin k
  const auto frames = deepemo::stft(sine_clip(k * rate / 1024.0, rate, 4096), cfg);
  REQUIRE(!frames.empty());
  for (const auto& frame : frames) {
    size_t argmax = 1;
    for (size_t b = 1; b <= 512; ++b) {
      if (std::abs(frame[b]) > std::abs(frame[argmax])) argmax = b;
    }
    CHECK(argmax == static_cast<size_t>(k));
  }
}

TEST_CASE("mel scale round-trips and hits its defining anchor") {
  CHECK(deepemo::hz_to_mel(0.0) == 0.0);
  CHECK(std::abs(deepemo::hz_to_mel(700.0) - 2595.0 * std::log10(2.0)) < 1e-9);
  for (double hz : {1.0, 100.0, 700.0, 1000.0, 4000.0, 8000.0, 11025.0}) {
    const double back = deepemo::mel_to_hz(deepemo::hz_to_mel(hz));
    CHECK(std::abs(back - hz) / hz < 1e-12);
  }
  double prev = deepemo::hz_to_mel(0.0);
  for (double hz = 50.0; hz <= 11025.0; hz += 50.0) {
    const double m = deepemo::hz_to_mel(hz);
    CHECK(m > prev);
    prev = m;
  }
  CHECK_THROWS_AS(deepemo::hz_to_mel(-1.0), Error);
}

TEST_CASE("mel filterbank geometry") {
  SpectrogramConfig cfg;
  cfg.n_fft = 512;
  cfg.n_mels = 4;
  cfg.fmax = 11025.0;
  const int rate = 22050;
  const deepemo::FilterBank fb = deepemo::mel_filterbank(cfg, rate);
  REQUIRE(fb.n_mels == 4);
  REQUIRE(fb.n_bins == 257);

  for (double w : fb.weights) {
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
  }

  // each row peaks at the FFT bin nearest its band center
  const std::vector<double> edges = deepemo::mel_edge_frequencies(cfg);
  REQUIRE(edges.size() == 6);
  const double bin_hz = static_cast<double>(rate) / cfg.n_fft;
  for (int m = 0; m < fb.n_mels; ++m) {
    int argmax = 0;
    for (int b = 1; b < fb.n_bins; ++b) {
      if (fb.at(m, b) > fb.at(m, argmax)) argmax = b;
    }
    const int nearest = static_cast<int>(std::lround(edges[m + 1] / bin_hz));
    CHECK(argmax == nearest);
    CHECK(fb.at(m, argmax) > 0.9);
  }

  // rows are unimodal: nondecreasing up to the peak, nonincreasing after
  for (int m = 0; m < fb.n_mels; ++m) {
    int peak = 0;
    for (int b = 1; b < fb.n_bins; ++b) {
      if (fb.at(m, b) > fb.at(m, peak)) peak = b;
    }
    for (int b = 1; b <= peak; ++b) CHECK(fb.at(m, b) >= fb.at(m, b - 1));
    for (int b = peak + 1; b < fb.n_bins; ++b) CHECK(fb.at(m, b) <= fb.at(m, b - 1));
  }
}

TEST_CASE("config validation rejects out-of-range parameters") {
  SpectrogramConfig cfg;
  cfg.n_fft = 1000;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.hop = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.hop = 2048;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.fmin = 5000.0;
  cfg.fmax = 100.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.fmin = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("mel spectrogram of silence sits on the dB floor") {
  SpectrogramConfig cfg;
  deepemo::AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(22050, 0.0f);
  const MelSpectrogram spec = deepemo::mel_spectrogram(clip, cfg);
  CHECK(spec.n_mels == 128);
  CHECK(spec.n_frames == deepemo::stft_frame_count(clip.samples.size(), cfg));
  CHECK(spec.sample_rate == 22050);
  for (float v : spec.data) CHECK(v == doctest::Approx(cfg.floor_db));
}

TEST_CASE("mel spectrogram concentrates a 1 kHz tone in the right band") {
  SpectrogramConfig cfg;
  const MelSpectrogram spec = deepemo::mel_spectrogram(sine_clip(1000.0, 22050, 22050), cfg);

  std::vector<double> band_mean(spec.n_mels, 0.0);
  for (int m = 0; m < spec.n_mels; ++m) {
    for (int t = 0; t < spec.n_frames; ++t) band_mean[m] += spec.at(m, t);
    band_mean[m] /= spec.n_frames;
  }
  const int hottest = static_cast<int>(
      std::max_element(band_mean.begin(), band_mean.end()) - band_mean.begin());

  const std::vector<double> edges = deepemo::mel_edge_frequencies(cfg);
  int expected = 0;
  for (int m = 0; m < spec.n_mels; ++m) {
    if (std::abs(edges[m + 1] - 1000.0) < std::abs(edges[expected + 1] - 1000.0)) expected = m;
  }
  CHECK(std::abs(hottest - expected) <= 1);
}

TEST_CASE("mel spectrogram is deterministic") {
  const deepemo::AudioClip tone = testutil::make_tone(3, 0.5);
  SpectrogramConfig cfg;
  const MelSpectrogram a = deepemo::mel_spectrogram(tone, cfg);
  const MelSpectrogram b = deepemo::mel_spectrogram(tone, cfg);
  REQUIRE(a.data.size() == b.data.size());
  for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("render maps min to 0, max to 255, constants to black") {
  MelSpectrogram spec;
  spec.n_mels = 1;
  spec.n_frames = 2;
  spec.sample_rate = 22050;
  spec.data = {-80.0f, -70.0f};
  const deepemo::GrayImage img = deepemo::render_image(spec);
  REQUIRE(img.width == 2);
  REQUIRE(img.height == 1);
  CHECK(img.pixels[0] == 0);
  CHECK(img.pixels[1] == 255);

  spec.data = {-42.0f, -42.0f};
  const deepemo::GrayImage flat = deepemo::render_image(spec);
  CHECK(flat.pixels[0] == 0);
  CHECK(flat.pixels[1] == 0);
}

TEST_CASE("render puts band 0 at the image bottom") {
  MelSpectrogram spec;
  spec.n_mels = 2;
  spec.n_frames = 1;
  spec.sample_rate = 22050;
  spec.data = {-80.0f, -10.0f};  // band 0 quiet, band 1 loud
  const deepemo::GrayImage img = deepemo::render_image(spec);
  REQUIRE(img.width == 1);
  REQUIRE(img.height == 2);
  CHECK(img.pixels[0] == 255);  // top row = highest band
  CHECK(img.pixels[1] == 0);
}

TEST_CASE("render is invariant under positive affine rescaling") {
  const MelSpectrogram spec =
      deepemo::mel_spectrogram(testutil::make_tone(5, 0.3), SpectrogramConfig{});
  MelSpectrogram scaled = spec;
  for (float& v : scaled.data) v = 3.0f * v + 17.0f;
  const deepemo::GrayImage a = deepemo::render_image(spec);
  const deepemo::GrayImage b = deepemo::render_image(scaled);
  REQUIRE(a.pixels.size() == b.pixels.size());
  size_t mismatches = 0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    // float rounding at cell boundaries may flip a value by one level
    if (std::abs(int(a.pixels[i]) - int(b.pixels[i])) > 1) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("write_pgm emits a P5 header followed by raw rows") {
  deepemo::GrayImage img;
  img.width = 3;
  img.height = 2;
  img.pixels = {0, 10, 20, 30, 40, 255};
  testutil::TempDir dir("pgm");
  const std::string path = dir.file("out.pgm");
  deepemo::write_pgm(img, path);

  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "P5");
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK(maxval == 255);
  in.get();  // single whitespace byte before pixel data
  std::vector<uint8_t> pixels(6);
  in.read(reinterpret_cast<char*>(pixels.data()), 6);
  CHECK(in.gcount() == 6);
  for (size_t i = 0; i < pixels.size(); ++i) CHECK(pixels[i] == img.pixels[i]);
}

TEST_CASE("mspc container round-trips bit-exactly") {
  const MelSpectrogram spec =
      deepemo::mel_spectrogram(testutil::make_tone(1, 0.4), SpectrogramConfig{});
  testutil::TempDir dir("mspc");
  const std::string path = dir.file("a.mspc");
  deepemo::save_mspc(spec, path);
  const MelSpectrogram back = deepemo::load_mspc(path);
  CHECK(back.n_mels == spec.n_mels);
  CHECK(back.n_frames == spec.n_frames);
  CHECK(back.sample_rate == spec.sample_rate);
  REQUIRE(back.data.size() == spec.data.size());
  for (size_t i = 0; i < spec.data.size(); ++i) CHECK(back.data[i] == spec.data[i]);
}

TEST_CASE("mspc decode rejects wrong magic and truncation") {
  const MelSpectrogram spec =
      deepemo::mel_spectrogram(testutil::make_tone(0, 0.2), SpectrogramConfig{});
  std::vector<uint8_t> bytes = deepemo::encode_mspc(spec);

  std::vector<uint8_t> corrupt = bytes;
  corrupt[0] = 'X';
  try {
    deepemo::decode_mspc(corrupt.data(), corrupt.size());
    FAIL("expected BadMagic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadMagic);
  }

  try {
    deepemo::decode_mspc(bytes.data(), bytes.size() - 3);
    FAIL("expected TruncatedFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncatedFile);
  }

  try {
    deepemo::decode_mspc(bytes.data(), 8);
    FAIL("expected a header error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::BadMagic || e.code() == ErrorCode::TruncatedFile));
  }
}
