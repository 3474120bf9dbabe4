#include "deepemo/resnet.hpp"

#include <algorithm>

#include "deepemo/error.hpp"

namespace deepemo {

ArchSpec ArchSpec::named(const std::string& name) {
  ArchSpec spec;
  spec.name = name;
  if (name == "resnet18") {
    spec.input_size = 224;
    spec.stem_channels = 64;
    spec.stem_kernel = 7;
    spec.stem_stride = 2;
    spec.stem_pad = 3;
    spec.stage_channels = {64, 128, 256, 512};
    spec.blocks_per_stage = 2;
  } else if (name == "resnet_tiny") {
    spec.input_size = 64;
    spec.stem_channels = 8;
    spec.stem_kernel = 3;
    spec.stem_stride = 1;
    spec.stem_pad = 1;
    spec.stage_channels = {8, 16, 32, 64};
    spec.blocks_per_stage = 1;
  } else {
    fail(ErrorCode::Usage, "unknown architecture '" + name + "' (expected resnet18 or resnet_tiny)");
  }
  return spec;
}

template <typename T>
ResNet<T>::ResNet(const ArchSpec& spec, int num_classes, uint64_t seed)
    : spec_(spec),
      num_classes_(num_classes),
      conv1_(3, spec.stem_channels, spec.stem_kernel, spec.stem_stride, spec.stem_pad, false),
      bn1_(spec.stem_channels),
      maxpool_(3, 2, 1),
      // clamp so construction survives long enough to raise the usage error
      fc_(spec.stage_channels.back(), std::max(num_classes, 1)) {
  if (num_classes < 1) fail(ErrorCode::Usage, "num_classes must be >= 1");
  int in_ch = spec.stem_channels;
  for (size_t s = 0; s < spec.stage_channels.size(); ++s) {
    const int out_ch = spec.stage_channels[s];
    std::vector<BasicBlock<T>> blocks;
    for (int b = 0; b < spec.blocks_per_stage; ++b) {
      const int stride = (s > 0 && b == 0) ? 2 : 1;
      blocks.emplace_back(b == 0 ? in_ch : out_ch, out_ch, b == 0 ? stride : 1);
    }
    stages_.push_back(std::move(blocks));
    in_ch = out_ch;
  }

  Rng rng(seed);
  conv1_.init(rng);
  bn1_.init(rng);
  for (auto& stage : stages_) {
    for (auto& block : stage) block.init(rng);
  }
  fc_.init(rng);
}

template <typename T>
TensorT<T> ResNet<T>::forward(const TensorT<T>& x, bool train) {
  if (x.ndim() != 4 || x.dim(1) != 3 || x.dim(2) != spec_.input_size ||
      x.dim(3) != spec_.input_size) {
    fail(ErrorCode::ShapeMismatch,
         "model expects [N, 3, " + std::to_string(spec_.input_size) + ", " +
             std::to_string(spec_.input_size) + "] input, got " + x.shape_str());
  }
  TensorT<T> h = maxpool_.forward(
      relu_.forward(bn1_.forward(conv1_.forward(x, train), train), train), train);
  for (auto& stage : stages_) {
    for (auto& block : stage) h = block.forward(h, train);
  }
  return fc_.forward(gap_.forward(h, train), train);
}

template <typename T>
TensorT<T> ResNet<T>::backward(const TensorT<T>& grad_logits) {
  TensorT<T> g = gap_.backward(fc_.backward(grad_logits));
  for (auto stage = stages_.rbegin(); stage != stages_.rend(); ++stage) {
    for (auto block = stage->rbegin(); block != stage->rend(); ++block) {
      g = block->backward(g);
    }
  }
  return conv1_.backward(bn1_.backward(relu_.backward(maxpool_.backward(g))));
}

template <typename T>
void ResNet<T>::zero_grad() {
  for (auto& p : parameters()) p.grad->zero();
}

template <typename T>
std::vector<ParamRef<T>> ResNet<T>::parameters() {
  std::vector<ParamRef<T>> params;
  conv1_.collect("conv1.", params);
  bn1_.collect("bn1.", params);
  for (size_t s = 0; s < stages_.size(); ++s) {
    for (size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].collect("layer" + std::to_string(s + 1) + "." + std::to_string(b) + ".",
                            params);
    }
  }
  fc_.collect("fc.", params);
  return params;
}

template <typename T>
std::vector<BufferRef<T>> ResNet<T>::buffers() {
  std::vector<BufferRef<T>> buffers;
  bn1_.collect_buffers("bn1.", buffers);
  for (size_t s = 0; s < stages_.size(); ++s) {
    for (size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].collect_buffers(
          "layer" + std::to_string(s + 1) + "." + std::to_string(b) + ".", buffers);
    }
  }
  return buffers;
}

template <typename T>
void ResNet<T>::replace_final_layer(int num_classes, uint64_t seed) {
  if (num_classes < 1) fail(ErrorCode::Usage, "num_classes must be >= 1");
  fc_ = Linear<T>(spec_.stage_channels.back(), num_classes);
  Rng rng(seed);
  fc_.init(rng);
  num_classes_ = num_classes;
}

template <typename T>
size_t ResNet<T>::parameter_count() {
  size_t total = 0;
  for (auto& p : parameters()) total += p.value->size();
  return total;
}

template class ResNet<float>;
template class ResNet<double>;

}  // namespace deepemo
