#pragma once

// Stateful layer wrappers over the kernels. Each layer owns its parameters
// and gradient accumulators, caches whatever its backward pass needs during
// a training-mode forward, and registers parameters/buffers under
// dot-separated names ("layer1.0.conv1.weight", ...).

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "deepemo/kernels.hpp"
#include "deepemo/rng.hpp"
#include "deepemo/tensor.hpp"

namespace deepemo {

template <typename T>
struct ParamRef {
  std::string name;
  TensorT<T>* value = nullptr;
  TensorT<T>* grad = nullptr;
};

template <typename T>
struct BufferRef {
  std::string name;
  TensorT<T>* value = nullptr;
};

// Uniform init over [-b, b] with b = sqrt(6 / fan_in).
template <typename T>
void kaiming_uniform(TensorT<T>& w, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (auto& v : w.data) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
class Conv2d {
 public:
  Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, bool bias)
      : weight({out_ch, in_ch, kernel, kernel}),
        grad_weight({out_ch, in_ch, kernel, kernel}),
        has_bias_(bias),
        stride_(stride),
        pad_(pad) {
    if (bias) {
      bias_ = TensorT<T>({out_ch});
      grad_bias_ = TensorT<T>({out_ch});
    }
  }

  void init(Rng& rng) {
    kaiming_uniform(weight, weight.dim(1) * weight.dim(2) * weight.dim(3), rng);
    if (has_bias_) bias_.zero();
  }

  TensorT<T> forward(const TensorT<T>& x, bool train) {
    if (train) input_ = x;
    return conv2d_forward(x, weight, has_bias_ ? &bias_ : nullptr, stride_, pad_);
  }

  TensorT<T> backward(const TensorT<T>& grad_out) {
    auto grads = conv2d_backward(input_, weight, has_bias_, stride_, pad_, grad_out);
    accumulate(grad_weight, grads.weight);
    if (has_bias_) accumulate(grad_bias_, grads.bias);
    return std::move(grads.input);
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params) {
    params.push_back({prefix + "weight", &weight, &grad_weight});
    if (has_bias_) params.push_back({prefix + "bias", &bias_, &grad_bias_});
  }

  TensorT<T> weight, grad_weight;

 private:
  static void accumulate(TensorT<T>& dst, const TensorT<T>& src) {
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
  }

  TensorT<T> bias_, grad_bias_;
  bool has_bias_;
  int stride_, pad_;
  TensorT<T> input_;
};

template <typename T>
class BatchNorm2d {
 public:
  explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.1)
      : gamma({channels}),
        beta({channels}),
        grad_gamma({channels}),
        grad_beta({channels}),
        running_mean({channels}),
        running_var({channels}),
        eps_(eps),
        momentum_(momentum) {}

  void init(Rng&) {
    gamma.fill(T(1));
    beta.zero();
    running_mean.zero();
    running_var.fill(T(1));
  }

  TensorT<T> forward(const TensorT<T>& x, bool train) {
    return batchnorm2d_forward(x, gamma, beta, running_mean, running_var, eps_, momentum_,
                               train ? BatchNormMode::Train : BatchNormMode::Eval,
                               train ? &cache_ : nullptr);
  }

  TensorT<T> backward(const TensorT<T>& grad_out) {
    auto grads = batchnorm2d_backward(gamma, cache_, grad_out);
    for (size_t i = 0; i < grad_gamma.data.size(); ++i) {
      grad_gamma.data[i] += grads.gamma.data[i];
      grad_beta.data[i] += grads.beta.data[i];
    }
    return std::move(grads.input);
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params) {
    params.push_back({prefix + "weight", &gamma, &grad_gamma});
    params.push_back({prefix + "bias", &beta, &grad_beta});
  }

  void collect_buffers(const std::string& prefix, std::vector<BufferRef<T>>& buffers) {
    buffers.push_back({prefix + "running_mean", &running_mean});
    buffers.push_back({prefix + "running_var", &running_var});
  }

  TensorT<T> gamma, beta, grad_gamma, grad_beta;
  TensorT<T> running_mean, running_var;

 private:
  double eps_, momentum_;
  BatchNormCache<T> cache_;
};

template <typename T>
class ReLU {
 public:
  TensorT<T> forward(const TensorT<T>& x, bool train) {
    if (train) input_ = x;
    return relu_forward(x);
  }

  TensorT<T> backward(const TensorT<T>& grad_out) { return relu_backward(input_, grad_out); }

 private:
  TensorT<T> input_;
};

template <typename T>
class MaxPool2d {
 public:
  MaxPool2d(int kernel, int stride, int pad) : kernel_(kernel), stride_(stride), pad_(pad) {}

  TensorT<T> forward(const TensorT<T>& x, bool train) {
    auto result = maxpool2d_forward(x, kernel_, stride_, pad_);
    if (train) {
      input_shape_ = x.shape;
      argmax_ = std::move(result.argmax);
    }
    return std::move(result.output);
  }

  TensorT<T> backward(const TensorT<T>& grad_out) {
    return maxpool2d_backward(input_shape_, argmax_, grad_out);
  }

 private:
  int kernel_, stride_, pad_;
  std::vector<int> input_shape_;
  std::vector<int32_t> argmax_;
};

template <typename T>
class GlobalAvgPool {
 public:
  TensorT<T> forward(const TensorT<T>& x, bool train) {
    if (train) input_shape_ = x.shape;
    return global_avg_pool_forward(x);
  }

  TensorT<T> backward(const TensorT<T>& grad_out) {
    return global_avg_pool_backward(input_shape_, grad_out);
  }

 private:
  std::vector<int> input_shape_;
};

template <typename T>
class Linear {
 public:
  Linear(int in_features, int out_features)
      : weight({out_features, in_features}),
        bias({out_features}),
        grad_weight({out_features, in_features}),
        grad_bias({out_features}) {}

  void init(Rng& rng) {
    kaiming_uniform(weight, weight.dim(1), rng);
    bias.zero();
  }

  TensorT<T> forward(const TensorT<T>& x, bool train) {
    if (train) input_ = x;
    return linear_forward(x, weight, bias);
  }

  TensorT<T> backward(const TensorT<T>& grad_out) {
    auto grads = linear_backward(input_, weight, grad_out);
    for (size_t i = 0; i < grad_weight.data.size(); ++i) grad_weight.data[i] += grads.weight.data[i];
    for (size_t i = 0; i < grad_bias.data.size(); ++i) grad_bias.data[i] += grads.bias.data[i];
    return std::move(grads.input);
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params) {
    params.push_back({prefix + "weight", &weight, &grad_weight});
    params.push_back({prefix + "bias", &bias, &grad_bias});
  }

  TensorT<T> weight, bias, grad_weight, grad_bias;

 private:
  TensorT<T> input_;
};

// Two 3x3 convolutions with batch norm and an additive skip connection.
// When the block changes resolution or width the skip path goes through a
// 1x1 stride-matched projection ("downsample").
template <typename T>
class BasicBlock {
 public:
  BasicBlock(int in_ch, int out_ch, int stride)
      : conv1(in_ch, out_ch, 3, stride, 1, false),
        bn1(out_ch),
        conv2(out_ch, out_ch, 3, 1, 1, false),
        bn2(out_ch) {
    if (stride != 1 || in_ch != out_ch) {
      down_conv = std::make_unique<Conv2d<T>>(in_ch, out_ch, 1, stride, 0, false);
      down_bn = std::make_unique<BatchNorm2d<T>>(out_ch);
    }
  }

  void init(Rng& rng) {
    conv1.init(rng);
    bn1.init(rng);
    conv2.init(rng);
    bn2.init(rng);
    if (down_conv) {
      down_conv->init(rng);
      down_bn->init(rng);
    }
  }

  TensorT<T> forward(const TensorT<T>& x, bool train) {
    TensorT<T> out = relu1_.forward(bn1.forward(conv1.forward(x, train), train), train);
    out = bn2.forward(conv2.forward(out, train), train);
    TensorT<T> identity = down_conv ? down_bn->forward(down_conv->forward(x, train), train) : x;
    check_same_shape(out, identity, "residual add");
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += identity.data[i];
    return relu2_.forward(out, train);
  }

  TensorT<T> backward(const TensorT<T>& grad_out) {
    TensorT<T> g_sum = relu2_.backward(grad_out);
    TensorT<T> g_main = conv1.backward(bn1.backward(relu1_.backward(
        conv2.backward(bn2.backward(g_sum)))));
    TensorT<T> g_skip = down_conv ? down_conv->backward(down_bn->backward(g_sum))
                                  : std::move(g_sum);
    for (size_t i = 0; i < g_main.data.size(); ++i) g_main.data[i] += g_skip.data[i];
    return g_main;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params) {
    conv1.collect(prefix + "conv1.", params);
    bn1.collect(prefix + "bn1.", params);
    conv2.collect(prefix + "conv2.", params);
    bn2.collect(prefix + "bn2.", params);
    if (down_conv) {
      down_conv->collect(prefix + "downsample.0.", params);
      down_bn->collect(prefix + "downsample.1.", params);
    }
  }

  void collect_buffers(const std::string& prefix, std::vector<BufferRef<T>>& buffers) {
    bn1.collect_buffers(prefix + "bn1.", buffers);
    bn2.collect_buffers(prefix + "bn2.", buffers);
    if (down_bn) down_bn->collect_buffers(prefix + "downsample.1.", buffers);
  }

  Conv2d<T> conv1;
  BatchNorm2d<T> bn1;
  Conv2d<T> conv2;
  BatchNorm2d<T> bn2;
  std::unique_ptr<Conv2d<T>> down_conv;
  std::unique_ptr<BatchNorm2d<T>> down_bn;

 private:
  ReLU<T> relu1_, relu2_;
};

}  // namespace deepemo
