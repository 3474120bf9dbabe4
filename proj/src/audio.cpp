#include "deepemo/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "binary_io.hpp"

namespace deepemo {

namespace {

constexpr uint32_t fourcc(char a, char b, char c, char d) {
  return static_cast<uint32_t>(static_cast<uint8_t>(a)) |
         (static_cast<uint32_t>(static_cast<uint8_t>(b)) << 8) |
         (static_cast<uint32_t>(static_cast<uint8_t>(c)) << 16) |
         (static_cast<uint32_t>(static_cast<uint8_t>(d)) << 24);
}

constexpr uint32_t kRiff = fourcc('R', 'I', 'F', 'F');
constexpr uint32_t kWave = fourcc('W', 'A', 'V', 'E');
constexpr uint32_t kFmt = fourcc('f', 'm', 't', ' ');
constexpr uint32_t kData = fourcc('d', 'a', 't', 'a');

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

struct FmtInfo {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

float decode_sample(ByteReader& r, uint16_t format, uint16_t bits) {
  if (format == kFormatFloat) {
    return r.f32();
  }
  switch (bits) {
    case 8:
      // 8-bit WAV is unsigned with midpoint 128.
      return (static_cast<int>(r.u8()) - 128) / 128.0f;
    case 16: {
      auto v = static_cast<int16_t>(r.u16());
      return static_cast<float>(v) / 32768.0f;
    }
    case 24: {
      const uint8_t* p = r.take(3);
      int32_t v = static_cast<int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<float>(v) / 8388608.0f;
    }
    case 32: {
      auto v = static_cast<int32_t>(r.u32());
      return static_cast<float>(static_cast<double>(v) / 2147483648.0);
    }
    default:
      fail(ErrorCode::UnsupportedFormat, "unsupported PCM bit depth: " + std::to_string(bits));
  }
}

}  // namespace

AudioClip decode_wav(const uint8_t* bytes, size_t len) {
  ByteReader r(bytes, len);
  if (r.remaining() < 12) fail(ErrorCode::MalformedHeader, "file too short for RIFF header");
  if (r.u32() != kRiff) fail(ErrorCode::MalformedHeader, "missing RIFF tag");
  r.u32();  // declared RIFF size; chunks are walked against the real buffer
  if (r.u32() != kWave) fail(ErrorCode::MalformedHeader, "missing WAVE tag");

  FmtInfo fmt;
  bool have_fmt = false;
  size_t data_offset = 0;
  uint32_t data_size = 0;
  bool have_data = false;

  while (r.remaining() >= 8) {
    uint32_t id = r.u32();
    uint32_t size = r.u32();
    if (id == kFmt) {
      if (size < 16) fail(ErrorCode::MalformedHeader, "fmt chunk too small");
      size_t next = r.pos() + size + (size & 1);
      fmt.format = r.u16();
      fmt.channels = r.u16();
      fmt.sample_rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      fmt.bits = r.u16();
      have_fmt = true;
      if (next > len) fail(ErrorCode::TruncatedFile, "fmt chunk exceeds file size");
      r.seek(next);
    } else if (id == kData) {
      data_offset = r.pos();
      data_size = size;
      have_data = true;
      if (data_offset + data_size > len) {
        fail(ErrorCode::TruncatedFile, "data chunk shorter than header declares");
      }
      size_t next = data_offset + data_size;
      if (next + (data_size & 1) <= len) next += data_size & 1;
      r.seek(next);
    } else {
      size_t next = r.pos() + size + (size & 1);
      if (next > len) break;  // trailing junk chunk; data/fmt already validated
      r.seek(next);
    }
  }

  if (!have_fmt) fail(ErrorCode::MalformedHeader, "missing fmt chunk");
  if (!have_data) fail(ErrorCode::MalformedHeader, "missing data chunk");
  if (fmt.format != kFormatPcm && fmt.format != kFormatFloat) {
    fail(ErrorCode::UnsupportedFormat,
         "unsupported format code " + std::to_string(fmt.format) + " (want PCM or IEEE float)");
  }
  if (fmt.format == kFormatFloat && fmt.bits != 32) {
    fail(ErrorCode::UnsupportedFormat, "IEEE float must be 32-bit");
  }
  if (fmt.channels != 1 && fmt.channels != 2) {
    fail(ErrorCode::UnsupportedFormat,
         "unsupported channel count: " + std::to_string(fmt.channels));
  }
  if (fmt.sample_rate == 0) fail(ErrorCode::MalformedHeader, "sample rate is zero");

  const size_t bytes_per_sample = fmt.bits / 8;
  if (bytes_per_sample == 0) fail(ErrorCode::MalformedHeader, "bits per sample is zero");
  const size_t frame_bytes = bytes_per_sample * fmt.channels;
  const size_t frames = data_size / frame_bytes;
  if (frames == 0) fail(ErrorCode::MalformedHeader, "data chunk holds no samples");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.samples.reserve(frames);
  ByteReader data(bytes + data_offset, data_size);
  for (size_t f = 0; f < frames; ++f) {
    float acc = 0.0f;
    for (uint16_t c = 0; c < fmt.channels; ++c) {
      acc += decode_sample(data, fmt.format, fmt.bits);
    }
    clip.samples.push_back(acc / static_cast<float>(fmt.channels));
  }
  return clip;
}

AudioClip decode_wav(const std::vector<uint8_t>& bytes) {
  return decode_wav(bytes.data(), bytes.size());
}

AudioClip decode_wav_file(const std::string& path) {
  return decode_wav(read_file_bytes(path));
}

std::vector<uint8_t> encode_wav16(const AudioClip& clip) {
  ByteWriter w;
  const uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * 2);
  w.u32(kRiff);
  w.u32(36 + data_size);
  w.u32(kWave);
  w.u32(kFmt);
  w.u32(16);
  w.u16(kFormatPcm);
  w.u16(1);
  w.u32(static_cast<uint32_t>(clip.sample_rate));
  w.u32(static_cast<uint32_t>(clip.sample_rate) * 2);  // byte rate
  w.u16(2);                                            // block align
  w.u16(16);
  w.u32(kData);
  w.u32(data_size);
  for (float s : clip.samples) {
    long v = std::lround(static_cast<double>(s) * 32768.0);
    v = std::clamp(v, -32768L, 32767L);
    w.u16(static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  return std::move(w.bytes());
}

void write_wav16(const AudioClip& clip, const std::string& path) {
  write_file_bytes(path, encode_wav16(clip));
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (clip.samples.empty()) fail(ErrorCode::EmptyClip, "cannot resample an empty clip");
  if (target_rate <= 0) fail(ErrorCode::Usage, "target rate must be positive");
  if (target_rate == clip.sample_rate) return clip;

  const size_t in_len = clip.samples.size();
  const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
  const auto out_len = static_cast<size_t>(
      std::llround(static_cast<double>(in_len) * ratio));

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const double step = static_cast<double>(clip.sample_rate) / target_rate;
  for (size_t j = 0; j < out_len; ++j) {
    double pos = static_cast<double>(j) * step;
    auto i0 = static_cast<size_t>(pos);
    if (i0 >= in_len - 1) {
      out.samples[j] = clip.samples[in_len - 1];
      continue;
    }
    double frac = pos - static_cast<double>(i0);
    double a = clip.samples[i0];
    double b = clip.samples[i0 + 1];
    out.samples[j] = static_cast<float>(a + (b - a) * frac);
  }
  return out;
}

AudioClip normalize_peak(const AudioClip& clip) {
  float peak = 0.0f;
  for (float s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak == 0.0f) return clip;
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    out.samples[i] = clip.samples[i] / peak;
  }
  return out;
}

}  // namespace deepemo
