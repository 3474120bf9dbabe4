#pragma once

// Forward/backward compute kernels for the network layers. Everything is
// templated on the scalar type: float for model storage, double for the
// gradient-check mode. Reductions that feed statistics or losses accumulate
// in double regardless of the storage type.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "deepemo/error.hpp"
#include "deepemo/tensor.hpp"

namespace deepemo {

struct ConvGeometry {
  int batch = 0, in_ch = 0, in_h = 0, in_w = 0;
  int out_ch = 0, kernel = 0, stride = 1, pad = 0;
  int out_h = 0, out_w = 0;
};

template <typename T>
ConvGeometry conv2d_geometry(const TensorT<T>& input, const TensorT<T>& weight,
                             int stride, int pad) {
  if (input.ndim() != 4) fail(ErrorCode::ShapeMismatch, "conv2d input must be NCHW");
  if (weight.ndim() != 4) fail(ErrorCode::ShapeMismatch, "conv2d weight must be OIKK");
  if (weight.dim(2) != weight.dim(3)) fail(ErrorCode::ShapeMismatch, "conv2d kernel must be square");
  if (input.dim(1) != weight.dim(1)) {
    fail(ErrorCode::ShapeMismatch, "conv2d channel mismatch: input " + input.shape_str() +
                                       " vs weight " + weight.shape_str());
  }
  ConvGeometry g;
  g.batch = input.dim(0);
  g.in_ch = input.dim(1);
  g.in_h = input.dim(2);
  g.in_w = input.dim(3);
  g.out_ch = weight.dim(0);
  g.kernel = weight.dim(2);
  g.stride = stride;
  g.pad = pad;
  if (stride < 1 || pad < 0) fail(ErrorCode::Usage, "conv2d stride must be >= 1 and pad >= 0");
  if (g.in_h + 2 * pad < g.kernel || g.in_w + 2 * pad < g.kernel) {
    fail(ErrorCode::ShapeMismatch, "conv2d spatial dims too small for kernel");
  }
  g.out_h = (g.in_h + 2 * pad - g.kernel) / stride + 1;
  g.out_w = (g.in_w + 2 * pad - g.kernel) / stride + 1;
  return g;
}

// Unrolls one sample into a (in_ch*k*k) x (out_h*out_w) patch matrix.
template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  const int cols = g.out_h * g.out_w;
  int row = 0;
  for (int c = 0; c < g.in_ch; ++c) {
    const T* plane = x + static_cast<size_t>(c) * g.in_h * g.in_w;
    for (int ki = 0; ki < g.kernel; ++ki) {
      for (int kj = 0; kj < g.kernel; ++kj, ++row) {
        T* out = col + static_cast<size_t>(row) * cols;
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * g.stride - g.pad + ki;
          if (ih < 0 || ih >= g.in_h) {
            std::fill(out, out + g.out_w, T(0));
            out += g.out_w;
            continue;
          }
          const T* src = plane + static_cast<size_t>(ih) * g.in_w;
          for (int ow = 0; ow < g.out_w; ++ow) {
            const int iw = ow * g.stride - g.pad + kj;
            *out++ = (iw >= 0 && iw < g.in_w) ? src[iw] : T(0);
          }
        }
      }
    }
  }
}

// Scatter-add of a patch-matrix gradient back onto the input plane.
template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* gx) {
  const int cols = g.out_h * g.out_w;
  int row = 0;
  for (int c = 0; c < g.in_ch; ++c) {
    T* plane = gx + static_cast<size_t>(c) * g.in_h * g.in_w;
    for (int ki = 0; ki < g.kernel; ++ki) {
      for (int kj = 0; kj < g.kernel; ++kj, ++row) {
        const T* src = col + static_cast<size_t>(row) * cols;
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * g.stride - g.pad + ki;
          if (ih < 0 || ih >= g.in_h) {
            src += g.out_w;
            continue;
          }
          T* dst = plane + static_cast<size_t>(ih) * g.in_w;
          for (int ow = 0; ow < g.out_w; ++ow) {
            const int iw = ow * g.stride - g.pad + kj;
            if (iw >= 0 && iw < g.in_w) dst[iw] += src[ow];
          }
          src += g.out_w;
        }
      }
    }
  }
}

/// Direct convolution as cross-correlation (no kernel flip), im2col + GEMM.
/// H_out = floor((H + 2*pad - k)/stride) + 1.
template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& input, const TensorT<T>& weight,
                          const TensorT<T>* bias, int stride, int pad) {
  const ConvGeometry g = conv2d_geometry(input, weight, stride, pad);
  if (bias && (bias->ndim() != 1 || bias->dim(0) != g.out_ch)) {
    fail(ErrorCode::ShapeMismatch, "conv2d bias must have out_ch entries");
  }
  TensorT<T> output({g.batch, g.out_ch, g.out_h, g.out_w});

  const int patch = g.in_ch * g.kernel * g.kernel;
  const int cols = g.out_h * g.out_w;
  std::vector<T> col(static_cast<size_t>(patch) * cols);
  const size_t in_stride = static_cast<size_t>(g.in_ch) * g.in_h * g.in_w;
  const size_t out_stride = static_cast<size_t>(g.out_ch) * cols;

  for (int n = 0; n < g.batch; ++n) {
    im2col(input.ptr() + static_cast<size_t>(n) * in_stride, g, col.data());
    T* y = output.ptr() + static_cast<size_t>(n) * out_stride;
    for (int o = 0; o < g.out_ch; ++o) {
      T* yo = y + static_cast<size_t>(o) * cols;
      const T b = bias ? bias->data[static_cast<size_t>(o)] : T(0);
      std::fill(yo, yo + cols, b);
      const T* wo = weight.ptr() + static_cast<size_t>(o) * patch;
      for (int p = 0; p < patch; ++p) {
        const T wv = wo[p];
        if (wv == T(0)) continue;
        const T* cp = col.data() + static_cast<size_t>(p) * cols;
        for (int m = 0; m < cols; ++m) yo[m] += wv * cp[m];
      }
    }
  }
  return output;
}

template <typename T>
struct Conv2dGrads {
  TensorT<T> input;
  TensorT<T> weight;
  TensorT<T> bias;  // empty when the layer has no bias
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const TensorT<T>& input, const TensorT<T>& weight,
                               bool has_bias, int stride, int pad,
                               const TensorT<T>& grad_output) {
  const ConvGeometry g = conv2d_geometry(input, weight, stride, pad);
  if (grad_output.shape != std::vector<int>{g.batch, g.out_ch, g.out_h, g.out_w}) {
    fail(ErrorCode::ShapeMismatch, "conv2d grad_output shape mismatch");
  }

  Conv2dGrads<T> grads;
  grads.input = TensorT<T>(input.shape);
  grads.weight = TensorT<T>(weight.shape);
  if (has_bias) grads.bias = TensorT<T>({g.out_ch});

  const int patch = g.in_ch * g.kernel * g.kernel;
  const int cols = g.out_h * g.out_w;
  std::vector<T> col(static_cast<size_t>(patch) * cols);
  std::vector<T> gcol(static_cast<size_t>(patch) * cols);
  const size_t in_stride = static_cast<size_t>(g.in_ch) * g.in_h * g.in_w;
  const size_t out_stride = static_cast<size_t>(g.out_ch) * cols;

  for (int n = 0; n < g.batch; ++n) {
    im2col(input.ptr() + static_cast<size_t>(n) * in_stride, g, col.data());
    const T* gy = grad_output.ptr() + static_cast<size_t>(n) * out_stride;

    // grad_weight[o][p] += sum_m gy[o][m] * col[p][m]
    for (int o = 0; o < g.out_ch; ++o) {
      const T* gyo = gy + static_cast<size_t>(o) * cols;
      T* gwo = grads.weight.ptr() + static_cast<size_t>(o) * patch;
      for (int p = 0; p < patch; ++p) {
        const T* cp = col.data() + static_cast<size_t>(p) * cols;
        double acc = 0.0;
        for (int m = 0; m < cols; ++m) acc += static_cast<double>(gyo[m]) * cp[m];
        gwo[p] += static_cast<T>(acc);
      }
      if (has_bias) {
        double acc = 0.0;
        for (int m = 0; m < cols; ++m) acc += static_cast<double>(gyo[m]);
        grads.bias.data[static_cast<size_t>(o)] += static_cast<T>(acc);
      }
    }

    // grad_col[p][m] = sum_o weight[o][p] * gy[o][m], then scatter to input.
    std::fill(gcol.begin(), gcol.end(), T(0));
    for (int o = 0; o < g.out_ch; ++o) {
      const T* gyo = gy + static_cast<size_t>(o) * cols;
      const T* wo = weight.ptr() + static_cast<size_t>(o) * patch;
      for (int p = 0; p < patch; ++p) {
        const T wv = wo[p];
        if (wv == T(0)) continue;
        T* gp = gcol.data() + static_cast<size_t>(p) * cols;
        for (int m = 0; m < cols; ++m) gp[m] += wv * gyo[m];
      }
    }
    col2im_add(gcol.data(), g, grads.input.ptr() + static_cast<size_t>(n) * in_stride);
  }
  return grads;
}

enum class BatchNormMode { Train, Eval };

template <typename T>
struct BatchNormCache {
  TensorT<T> x_hat;            // normalized input, needed for backward
  std::vector<double> inv_std; // per channel
  int batch = 0, channels = 0, spatial = 0;
};

/// y = gamma * (x - mu) / sqrt(var + eps) + beta. Train mode uses batch
/// statistics over N*H*W and updates the running estimates with momentum
/// (unbiased variance in the running update); eval mode uses the running
/// estimates.
template <typename T>
TensorT<T> batchnorm2d_forward(const TensorT<T>& input, const TensorT<T>& gamma,
                               const TensorT<T>& beta, TensorT<T>& running_mean,
                               TensorT<T>& running_var, double eps, double momentum,
                               BatchNormMode mode, BatchNormCache<T>* cache) {
  if (input.ndim() != 4) fail(ErrorCode::ShapeMismatch, "batchnorm input must be NCHW");
  const int batch = input.dim(0), channels = input.dim(1);
  const int spatial = input.dim(2) * input.dim(3);
  auto check_param = [channels](const TensorT<T>& p, const char* what) {
    if (p.ndim() != 1 || p.dim(0) != channels) {
      fail(ErrorCode::ShapeMismatch, std::string("batchnorm ") + what + " must have C entries");
    }
  };
  check_param(gamma, "gamma");
  check_param(beta, "beta");
  check_param(running_mean, "running_mean");
  check_param(running_var, "running_var");

  TensorT<T> output(input.shape);
  if (cache) {
    cache->x_hat = TensorT<T>(input.shape);
    cache->inv_std.assign(static_cast<size_t>(channels), 0.0);
    cache->batch = batch;
    cache->channels = channels;
    cache->spatial = spatial;
  }

  const auto m = static_cast<double>(batch) * spatial;
  for (int c = 0; c < channels; ++c) {
    double mean, var;
    if (mode == BatchNormMode::Train) {
      double sum = 0.0;
      for (int n = 0; n < batch; ++n) {
        const T* x = input.ptr() + (static_cast<size_t>(n) * channels + c) * spatial;
        for (int s = 0; s < spatial; ++s) sum += x[s];
      }
      mean = sum / m;
      double sq = 0.0;
      for (int n = 0; n < batch; ++n) {
        const T* x = input.ptr() + (static_cast<size_t>(n) * channels + c) * spatial;
        for (int s = 0; s < spatial; ++s) {
          const double d = x[s] - mean;
          sq += d * d;
        }
      }
      var = sq / m;
      const double unbiased = m > 1.0 ? sq / (m - 1.0) : var;
      running_mean.data[static_cast<size_t>(c)] = static_cast<T>(
          (1.0 - momentum) * running_mean.data[static_cast<size_t>(c)] + momentum * mean);
      running_var.data[static_cast<size_t>(c)] = static_cast<T>(
          (1.0 - momentum) * running_var.data[static_cast<size_t>(c)] + momentum * unbiased);
    } else {
      mean = running_mean.data[static_cast<size_t>(c)];
      var = running_var.data[static_cast<size_t>(c)];
    }

    const double inv_std = 1.0 / std::sqrt(var + eps);
    if (cache) cache->inv_std[static_cast<size_t>(c)] = inv_std;
    const double g = gamma.data[static_cast<size_t>(c)];
    const double b = beta.data[static_cast<size_t>(c)];
    for (int n = 0; n < batch; ++n) {
      const size_t off = (static_cast<size_t>(n) * channels + c) * spatial;
      const T* x = input.ptr() + off;
      T* y = output.ptr() + off;
      for (int s = 0; s < spatial; ++s) {
        const double x_hat = (x[s] - mean) * inv_std;
        if (cache) cache->x_hat.data[off + static_cast<size_t>(s)] = static_cast<T>(x_hat);
        y[s] = static_cast<T>(g * x_hat + b);
      }
    }
  }
  return output;
}

template <typename T>
struct BatchNormGrads {
  TensorT<T> input;
  TensorT<T> gamma;
  TensorT<T> beta;
};

template <typename T>
BatchNormGrads<T> batchnorm2d_backward(const TensorT<T>& gamma, const BatchNormCache<T>& cache,
                                       const TensorT<T>& grad_output) {
  const int batch = cache.batch, channels = cache.channels, spatial = cache.spatial;
  BatchNormGrads<T> grads;
  grads.input = TensorT<T>(grad_output.shape);
  grads.gamma = TensorT<T>({channels});
  grads.beta = TensorT<T>({channels});

  const auto m = static_cast<double>(batch) * spatial;
  for (int c = 0; c < channels; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int n = 0; n < batch; ++n) {
      const size_t off = (static_cast<size_t>(n) * channels + c) * spatial;
      for (int s = 0; s < spatial; ++s) {
        const double dy = grad_output.data[off + static_cast<size_t>(s)];
        sum_dy += dy;
        sum_dy_xhat += dy * cache.x_hat.data[off + static_cast<size_t>(s)];
      }
    }
    grads.gamma.data[static_cast<size_t>(c)] = static_cast<T>(sum_dy_xhat);
    grads.beta.data[static_cast<size_t>(c)] = static_cast<T>(sum_dy);

    const double g = gamma.data[static_cast<size_t>(c)];
    const double inv_std = cache.inv_std[static_cast<size_t>(c)];
    const double k = g * inv_std;
    for (int n = 0; n < batch; ++n) {
      const size_t off = (static_cast<size_t>(n) * channels + c) * spatial;
      for (int s = 0; s < spatial; ++s) {
        const double dy = grad_output.data[off + static_cast<size_t>(s)];
        const double x_hat = cache.x_hat.data[off + static_cast<size_t>(s)];
        grads.input.data[off + static_cast<size_t>(s)] =
            static_cast<T>(k * (dy - sum_dy / m - x_hat * sum_dy_xhat / m));
      }
    }
  }
  return grads;
}

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& input) {
  TensorT<T> output(input.shape);
  for (size_t i = 0; i < input.data.size(); ++i) {
    output.data[i] = input.data[i] > T(0) ? input.data[i] : T(0);
  }
  return output;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& input, const TensorT<T>& grad_output) {
  check_same_shape(input, grad_output, "relu backward");
  TensorT<T> grad(input.shape);
  for (size_t i = 0; i < input.data.size(); ++i) {
    grad.data[i] = input.data[i] > T(0) ? grad_output.data[i] : T(0);
  }
  return grad;
}

template <typename T>
struct MaxPoolResult {
  TensorT<T> output;
  std::vector<int32_t> argmax;  // flat H*W index per output cell; ties go to the first maximum
};

template <typename T>
MaxPoolResult<T> maxpool2d_forward(const TensorT<T>& input, int kernel, int stride, int pad) {
  if (input.ndim() != 4) fail(ErrorCode::ShapeMismatch, "maxpool input must be NCHW");
  if (kernel < 1 || stride < 1 || pad < 0) fail(ErrorCode::Usage, "bad maxpool geometry");
  const int batch = input.dim(0), channels = input.dim(1);
  const int h = input.dim(2), w = input.dim(3);
  if (h + 2 * pad < kernel || w + 2 * pad < kernel) {
    fail(ErrorCode::ShapeMismatch, "maxpool window larger than padded input");
  }
  const int out_h = (h + 2 * pad - kernel) / stride + 1;
  const int out_w = (w + 2 * pad - kernel) / stride + 1;

  MaxPoolResult<T> result;
  result.output = TensorT<T>({batch, channels, out_h, out_w});
  result.argmax.assign(result.output.data.size(), -1);

  size_t out_idx = 0;
  for (int n = 0; n < batch; ++n) {
    for (int c = 0; c < channels; ++c) {
      const T* plane = input.ptr() + (static_cast<size_t>(n) * channels + c) * h * w;
      for (int oh = 0; oh < out_h; ++oh) {
        for (int ow = 0; ow < out_w; ++ow, ++out_idx) {
          T best = -std::numeric_limits<T>::infinity();
          int32_t best_idx = -1;
          for (int ki = 0; ki < kernel; ++ki) {
            const int ih = oh * stride - pad + ki;
            if (ih < 0 || ih >= h) continue;
            for (int kj = 0; kj < kernel; ++kj) {
              const int iw = ow * stride - pad + kj;
              if (iw < 0 || iw >= w) continue;
              const T v = plane[ih * w + iw];
              if (v > best) {  // strict: first maximum wins ties
                best = v;
                best_idx = ih * w + iw;
              }
            }
          }
          result.output.data[out_idx] = best_idx >= 0 ? best : T(0);
          result.argmax[out_idx] = best_idx;
        }
      }
    }
  }
  return result;
}

template <typename T>
TensorT<T> maxpool2d_backward(const std::vector<int>& input_shape,
                              const std::vector<int32_t>& argmax,
                              const TensorT<T>& grad_output) {
  TensorT<T> grad(input_shape);
  const int channels = input_shape[1];
  const int plane = input_shape[2] * input_shape[3];
  const int out_plane = grad_output.dim(2) * grad_output.dim(3);
  size_t out_idx = 0;
  for (int n = 0; n < grad_output.dim(0); ++n) {
    for (int c = 0; c < channels; ++c) {
      T* gplane = grad.ptr() + (static_cast<size_t>(n) * channels + c) * plane;
      for (int i = 0; i < out_plane; ++i, ++out_idx) {
        const int32_t src = argmax[out_idx];
        if (src >= 0) gplane[src] += grad_output.data[out_idx];
      }
    }
  }
  return grad;
}

/// Mean over H and W; output is [N, C].
template <typename T>
TensorT<T> global_avg_pool_forward(const TensorT<T>& input) {
  if (input.ndim() != 4) fail(ErrorCode::ShapeMismatch, "global_avg_pool input must be NCHW");
  const int batch = input.dim(0), channels = input.dim(1);
  const int spatial = input.dim(2) * input.dim(3);
  TensorT<T> output({batch, channels});
  for (int n = 0; n < batch; ++n) {
    for (int c = 0; c < channels; ++c) {
      const T* x = input.ptr() + (static_cast<size_t>(n) * channels + c) * spatial;
      double acc = 0.0;
      for (int s = 0; s < spatial; ++s) acc += x[s];
      output.data[static_cast<size_t>(n) * channels + c] = static_cast<T>(acc / spatial);
    }
  }
  return output;
}

template <typename T>
TensorT<T> global_avg_pool_backward(const std::vector<int>& input_shape,
                                    const TensorT<T>& grad_output) {
  TensorT<T> grad(input_shape);
  const int channels = input_shape[1];
  const int spatial = input_shape[2] * input_shape[3];
  for (int n = 0; n < grad_output.dim(0); ++n) {
    for (int c = 0; c < channels; ++c) {
      const T g = grad_output.data[static_cast<size_t>(n) * channels + c] / static_cast<T>(spatial);
      T* gx = grad.ptr() + (static_cast<size_t>(n) * channels + c) * spatial;
      for (int s = 0; s < spatial; ++s) gx[s] = g;
    }
  }
  return grad;
}

/// y = x W^T + b with weight stored [out, in].
template <typename T>
TensorT<T> linear_forward(const TensorT<T>& input, const TensorT<T>& weight,
                          const TensorT<T>& bias) {
  if (input.ndim() != 2 || weight.ndim() != 2) {
    fail(ErrorCode::ShapeMismatch, "linear expects 2-d input and weight");
  }
  const int batch = input.dim(0), in_features = input.dim(1);
  const int out_features = weight.dim(0);
  if (weight.dim(1) != in_features) {
    fail(ErrorCode::ShapeMismatch, "linear weight in_features mismatch: " + weight.shape_str() +
                                       " vs input " + input.shape_str());
  }
  if (bias.ndim() != 1 || bias.dim(0) != out_features) {
    fail(ErrorCode::ShapeMismatch, "linear bias must have out_features entries");
  }
  TensorT<T> output({batch, out_features});
  for (int n = 0; n < batch; ++n) {
    const T* x = input.ptr() + static_cast<size_t>(n) * in_features;
    T* y = output.ptr() + static_cast<size_t>(n) * out_features;
    for (int o = 0; o < out_features; ++o) {
      const T* w = weight.ptr() + static_cast<size_t>(o) * in_features;
      double acc = bias.data[static_cast<size_t>(o)];
      for (int i = 0; i < in_features; ++i) acc += static_cast<double>(x[i]) * w[i];
      y[o] = static_cast<T>(acc);
    }
  }
  return output;
}

template <typename T>
struct LinearGrads {
  TensorT<T> input;
  TensorT<T> weight;
  TensorT<T> bias;
};

template <typename T>
LinearGrads<T> linear_backward(const TensorT<T>& input, const TensorT<T>& weight,
                               const TensorT<T>& grad_output) {
  const int batch = input.dim(0), in_features = input.dim(1);
  const int out_features = weight.dim(0);
  LinearGrads<T> grads;
  grads.input = TensorT<T>(input.shape);
  grads.weight = TensorT<T>(weight.shape);
  grads.bias = TensorT<T>({out_features});

  for (int n = 0; n < batch; ++n) {
    const T* x = input.ptr() + static_cast<size_t>(n) * in_features;
    const T* gy = grad_output.ptr() + static_cast<size_t>(n) * out_features;
    T* gx = grads.input.ptr() + static_cast<size_t>(n) * in_features;
    for (int o = 0; o < out_features; ++o) {
      const T g = gy[o];
      const T* w = weight.ptr() + static_cast<size_t>(o) * in_features;
      T* gw = grads.weight.ptr() + static_cast<size_t>(o) * in_features;
      for (int i = 0; i < in_features; ++i) {
        gx[i] += g * w[i];
        gw[i] += g * x[i];
      }
      grads.bias.data[static_cast<size_t>(o)] += g;
    }
  }
  return grads;
}

/// Numerically stable softmax over the last axis of [N, C] logits.
template <typename T>
TensorT<T> softmax(const TensorT<T>& logits) {
  if (logits.ndim() != 2) fail(ErrorCode::ShapeMismatch, "softmax expects [N, C] logits");
  const int batch = logits.dim(0), classes = logits.dim(1);
  TensorT<T> probs(logits.shape);
  for (int n = 0; n < batch; ++n) {
    const T* z = logits.ptr() + static_cast<size_t>(n) * classes;
    T* p = probs.ptr() + static_cast<size_t>(n) * classes;
    double mx = z[0];
    for (int c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(z[c]));
    double denom = 0.0;
    for (int c = 0; c < classes; ++c) denom += std::exp(static_cast<double>(z[c]) - mx);
    for (int c = 0; c < classes; ++c) {
      p[c] = static_cast<T>(std::exp(static_cast<double>(z[c]) - mx) / denom);
    }
  }
  return probs;
}

template <typename T>
struct CrossEntropyResult {
  double loss = 0.0;          // mean over the batch
  TensorT<T> grad_logits;     // (softmax - one_hot) / batch
  TensorT<T> probs;
};

template <typename T>
CrossEntropyResult<T> cross_entropy(const TensorT<T>& logits, const std::vector<int>& targets) {
  if (logits.ndim() != 2) fail(ErrorCode::ShapeMismatch, "cross_entropy expects [N, C] logits");
  const int batch = logits.dim(0), classes = logits.dim(1);
  if (static_cast<int>(targets.size()) != batch) {
    fail(ErrorCode::ShapeMismatch, "cross_entropy target count mismatch");
  }
  for (int t : targets) {
    if (t < 0 || t >= classes) {
      fail(ErrorCode::TargetOutOfRange, "target class " + std::to_string(t) + " outside [0, " +
                                            std::to_string(classes) + ")");
    }
  }

  CrossEntropyResult<T> result;
  result.probs = softmax(logits);
  result.grad_logits = TensorT<T>(logits.shape);
  double loss_sum = 0.0;
  for (int n = 0; n < batch; ++n) {
    const T* z = logits.ptr() + static_cast<size_t>(n) * classes;
    const T* p = result.probs.ptr() + static_cast<size_t>(n) * classes;
    T* g = result.grad_logits.ptr() + static_cast<size_t>(n) * classes;
    double mx = z[0];
    for (int c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(z[c]));
    double denom = 0.0;
    for (int c = 0; c < classes; ++c) denom += std::exp(static_cast<double>(z[c]) - mx);
    const int t = targets[static_cast<size_t>(n)];
    loss_sum += std::log(denom) - (static_cast<double>(z[t]) - mx);
    for (int c = 0; c < classes; ++c) {
      g[c] = static_cast<T>((static_cast<double>(p[c]) - (c == t ? 1.0 : 0.0)) / batch);
    }
  }
  result.loss = loss_sum / batch;
  return result;
}

}  // namespace deepemo
