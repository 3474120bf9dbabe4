#include "deepemo/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "deepemo/error.hpp"

namespace deepemo {
namespace {

constexpr float kImagenetMean[3] = {0.485f, 0.456f, 0.406f};
constexpr float kImagenetStd[3] = {0.229f, 0.224f, 0.225f};

void write_example(const MelSpectrogram& spec, int size, bool imagenet_norm, float* out) {
  if (spec.n_mels < 1 || spec.n_frames < 1) {
    fail(ErrorCode::EmptyInput, "cannot build model input from an empty spectrogram");
  }
  float lo = spec.data[0], hi = spec.data[0];
  for (float v : spec.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const float span = hi - lo;
  std::vector<float> unit(spec.data.size(), 0.0f);
  if (span > 0.0f) {
    for (size_t i = 0; i < spec.data.size(); ++i) unit[i] = (spec.data[i] - lo) / span;
  }

  std::vector<float> plane = resize_bilinear(unit, spec.n_mels, spec.n_frames, size, size);
  const size_t n = plane.size();
  for (int c = 0; c < 3; ++c) {
    float* dst = out + static_cast<size_t>(c) * n;
    if (imagenet_norm) {
      for (size_t i = 0; i < n; ++i) dst[i] = (plane[i] - kImagenetMean[c]) / kImagenetStd[c];
    } else {
      std::copy(plane.begin(), plane.end(), dst);
    }
  }
}

}  // namespace

std::vector<float> resize_bilinear(const std::vector<float>& src, int src_h, int src_w,
                                   int dst_h, int dst_w) {
  if (src_h < 1 || src_w < 1 || dst_h < 1 || dst_w < 1 ||
      src.size() != static_cast<size_t>(src_h) * src_w) {
    fail(ErrorCode::ShapeMismatch, "bad resize geometry");
  }
  std::vector<float> dst(static_cast<size_t>(dst_h) * dst_w);
  const double sy = static_cast<double>(src_h) / dst_h;
  const double sx = static_cast<double>(src_w) / dst_w;
  for (int y = 0; y < dst_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src_h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < dst_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src_w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double wx = fx - x0;
      const double top = src[static_cast<size_t>(y0) * src_w + x0] * (1.0 - wx) +
                         src[static_cast<size_t>(y0) * src_w + x1] * wx;
      const double bot = src[static_cast<size_t>(y1) * src_w + x0] * (1.0 - wx) +
                         src[static_cast<size_t>(y1) * src_w + x1] * wx;
      dst[static_cast<size_t>(y) * dst_w + x] = static_cast<float>(top * (1.0 - wy) + bot * wy);
    }
  }
  return dst;
}

Tensor spectrogram_to_input(const MelSpectrogram& spec, int size, bool imagenet_norm) {
  Tensor input({1, 3, size, size});
  write_example(spec, size, imagenet_norm, input.ptr());
  return input;
}

Tensor make_batch(const std::vector<const MelSpectrogram*>& specs, int size, bool imagenet_norm) {
  if (specs.empty()) fail(ErrorCode::EmptyInput, "cannot build an empty batch");
  Tensor batch({static_cast<int>(specs.size()), 3, size, size});
  const size_t stride = static_cast<size_t>(3) * size * size;
  for (size_t i = 0; i < specs.size(); ++i) {
    write_example(*specs[i], size, imagenet_norm, batch.ptr() + i * stride);
  }
  return batch;
}

}  // namespace deepemo
