#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepemo/layers.hpp"

namespace deepemo {

/// Structural description of a residual classifier. Two are built in:
/// "resnet18" (the standard 18-layer network, 224x224 inputs) and
/// "resnet_tiny" (a narrow one-block-per-stage variant, 64x64 inputs).
struct ArchSpec {
  std::string name;
  int input_size = 0;
  int stem_channels = 0;
  int stem_kernel = 0;
  int stem_stride = 0;
  int stem_pad = 0;
  std::vector<int> stage_channels;
  int blocks_per_stage = 0;

  int feature_dim() const { return stage_channels.back(); }

  static ArchSpec named(const std::string& name);
};

/// Residual classifier over 3-channel square images. Forward in training
/// mode records everything backward needs; a backward call then accumulates
/// parameter gradients. Parameter and buffer names follow the usual
/// state-dict layout (conv1.weight, layer1.0.conv1.weight, fc.bias, ...).
template <typename T>
class ResNet {
 public:
  ResNet(const ArchSpec& spec, int num_classes, uint64_t seed);

  /// Input [N, 3, S, S] with S = spec().input_size; returns logits [N, classes].
  TensorT<T> forward(const TensorT<T>& x, bool train);

  /// Propagates d(loss)/d(logits) back through the recorded forward pass,
  /// adding into each parameter's gradient. Returns d(loss)/d(input).
  TensorT<T> backward(const TensorT<T>& grad_logits);

  void zero_grad();

  std::vector<ParamRef<T>> parameters();
  std::vector<BufferRef<T>> buffers();

  /// Swaps the classification head for a freshly initialized one. All other
  /// parameters are untouched.
  void replace_final_layer(int num_classes, uint64_t seed);

  size_t parameter_count();

  const ArchSpec& arch() const { return spec_; }
  int num_classes() const { return num_classes_; }
  Linear<T>& fc() { return fc_; }

 private:
  ArchSpec spec_;
  int num_classes_;
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  ReLU<T> relu_;
  MaxPool2d<T> maxpool_;
  std::vector<std::vector<BasicBlock<T>>> stages_;
  GlobalAvgPool<T> gap_;
  Linear<T> fc_;
};

extern template class ResNet<float>;
extern template class ResNet<double>;

}  // namespace deepemo
