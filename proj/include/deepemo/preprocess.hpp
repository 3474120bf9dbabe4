#pragma once

#include <vector>

#include "deepemo/dsp.hpp"
#include "deepemo/tensor.hpp"

namespace deepemo {

/// Turns one mel spectrogram into a [1, 3, size, size] model input:
/// per-example min-max scaling to [0, 1] (a constant grid maps to zeros),
/// bilinear resize with half-pixel sampling, identical values in all three
/// channels, then optional ImageNet mean/std normalization.
Tensor spectrogram_to_input(const MelSpectrogram& spec, int size, bool imagenet_norm);

/// Stacks several spectrograms into a [N, 3, size, size] batch.
Tensor make_batch(const std::vector<const MelSpectrogram*>& specs, int size, bool imagenet_norm);

/// Bilinear resize of a row-major grid, half-pixel convention, edge clamp.
std::vector<float> resize_bilinear(const std::vector<float>& src, int src_h, int src_w,
                                   int dst_h, int dst_w);

}  // namespace deepemo
