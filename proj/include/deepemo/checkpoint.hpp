#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deepemo/resnet.hpp"
#include "deepemo/tensor.hpp"

namespace deepemo {

/// Named float tensors plus training metadata. On disk this is the "DEMO"
/// container: magic, u32 version, u32 tensor count, then each tensor as
/// (u32 name length, name bytes, u32 ndim, u32 dims, f32 payload), all
/// little-endian, followed by a u64 FNV-1a checksum of every preceding
/// byte. Metadata rides in a reserved zero-payload tensor so the tensor
/// framing stays the only record type.
struct Checkpoint {
  std::map<std::string, Tensor> tensors;
  std::string arch;
  int num_classes = 0;
  int epoch = 0;
  uint64_t seed = 0;
};

std::vector<uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const uint8_t* data, size_t len);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Copies every parameter and running statistic out of the model.
Checkpoint snapshot(ResNet<float>& model, int epoch, uint64_t seed);

/// Copies checkpoint tensors into the model by name. With `backbone_only`
/// the classification head ("fc.*") is left untouched; otherwise every
/// model tensor must be present. Extra checkpoint tensors are ignored.
void load_into(ResNet<float>& model, const Checkpoint& ckpt, bool backbone_only);

}  // namespace deepemo
