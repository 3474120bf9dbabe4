#include "deepemo/checkpoint.hpp"

#include <cstdio>

#include "deepemo/error.hpp"
#include "deepemo/hash.hpp"
#include "binary_io.hpp"

namespace deepemo {
namespace {

constexpr char kMagic[4] = {'D', 'E', 'M', 'O'};
constexpr uint32_t kVersion = 1;
constexpr const char* kMetaPrefix = "__meta__:";

std::string meta_name(const Checkpoint& ckpt) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%sarch=%s;num_classes=%d;epoch=%d;seed=%llu", kMetaPrefix,
                ckpt.arch.c_str(), ckpt.num_classes, ckpt.epoch,
                static_cast<unsigned long long>(ckpt.seed));
  return buf;
}

void parse_meta(const std::string& name, Checkpoint& ckpt) {
  std::string body = name.substr(std::string(kMetaPrefix).size());
  size_t pos = 0;
  while (pos < body.size()) {
    size_t end = body.find(';', pos);
    if (end == std::string::npos) end = body.size();
    const std::string item = body.substr(pos, end - pos);
    const size_t eq = item.find('=');
    if (eq != std::string::npos) {
      const std::string key = item.substr(0, eq);
      const std::string value = item.substr(eq + 1);
      try {
        if (key == "arch") ckpt.arch = value;
        else if (key == "num_classes") ckpt.num_classes = std::stoi(value);
        else if (key == "epoch") ckpt.epoch = std::stoi(value);
        else if (key == "seed") ckpt.seed = std::stoull(value);
      } catch (const std::exception&) {
        fail(ErrorCode::MalformedHeader, "bad checkpoint metadata entry '" + item + "'");
      }
    }
    pos = end + 1;
  }
}

void encode_tensor(ByteWriter& w, const std::string& name, const Tensor& t) {
  w.u32(static_cast<uint32_t>(name.size()));
  w.raw(name.data(), name.size());
  w.u32(static_cast<uint32_t>(t.ndim()));
  for (int d = 0; d < t.ndim(); ++d) w.u32(static_cast<uint32_t>(t.dim(d)));
  for (float v : t.data) w.f32(v);
}

}  // namespace

std::vector<uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<uint32_t>(ckpt.tensors.size() + 1));
  encode_tensor(w, meta_name(ckpt), Tensor({1}));
  for (const auto& [name, tensor] : ckpt.tensors) encode_tensor(w, name, tensor);
  w.u64(fnv1a64(w.bytes().data(), w.bytes().size()));
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const uint8_t* data, size_t len) {
  if (len < 20) fail(ErrorCode::TruncatedFile, "checkpoint too small to be valid");
  const uint64_t stored = ByteReader(data + len - 8, 8).u64();
  const uint64_t actual = fnv1a64(data, len - 8);
  if (stored != actual) {
    fail(ErrorCode::ChecksumMismatch, "checkpoint checksum mismatch (file is corrupt)");
  }

  ByteReader r(data, len - 8);
  char magic[4];
  std::memcpy(magic, r.take(4), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    fail(ErrorCode::BadMagic, "not a checkpoint file (bad magic)");
  }
  const uint32_t version = r.u32();
  if (version != kVersion) {
    fail(ErrorCode::VersionMismatch,
         "unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ckpt;
  const uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = r.u32();
    std::string name(reinterpret_cast<const char*>(r.take(name_len)), name_len);
    const uint32_t ndim = r.u32();
    if (ndim == 0 || ndim > 8) {
      fail(ErrorCode::MalformedHeader, "checkpoint tensor '" + name + "' has bad rank");
    }
    std::vector<int> shape(ndim);
    size_t total = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      shape[d] = static_cast<int>(r.u32());
      if (shape[d] <= 0) {
        fail(ErrorCode::MalformedHeader, "checkpoint tensor '" + name + "' has bad dims");
      }
      total *= static_cast<size_t>(shape[d]);
    }
    std::vector<float> values(total);
    for (size_t k = 0; k < total; ++k) values[k] = r.f32();
    if (name.rfind(kMetaPrefix, 0) == 0) {
      parse_meta(name, ckpt);
    } else {
      ckpt.tensors.emplace(std::move(name), Tensor(shape, std::move(values)));
    }
  }
  if (ckpt.num_classes == 0) {
    const auto fc = ckpt.tensors.find("fc.weight");
    if (fc != ckpt.tensors.end()) ckpt.num_classes = fc->second.dim(0);
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  return decode_checkpoint(bytes.data(), bytes.size());
}

Checkpoint snapshot(ResNet<float>& model, int epoch, uint64_t seed) {
  Checkpoint ckpt;
  ckpt.arch = model.arch().name;
  ckpt.num_classes = model.num_classes();
  ckpt.epoch = epoch;
  ckpt.seed = seed;
  for (const auto& p : model.parameters()) ckpt.tensors.emplace(p.name, *p.value);
  for (const auto& b : model.buffers()) ckpt.tensors.emplace(b.name, *b.value);
  return ckpt;
}

void load_into(ResNet<float>& model, const Checkpoint& ckpt, bool backbone_only) {
  auto copy_named = [&](const std::string& name, Tensor* dst) {
    if (backbone_only && name.rfind("fc.", 0) == 0) return;
    const auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) {
      fail(ErrorCode::MissingParameter, "checkpoint is missing tensor '" + name + "'");
    }
    if (it->second.shape != dst->shape) {
      fail(ErrorCode::ShapeMismatch, "checkpoint tensor '" + name + "' has shape " +
                                         it->second.shape_str() + ", model expects " +
                                         dst->shape_str());
    }
    dst->data = it->second.data;
  };
  for (const auto& p : model.parameters()) copy_named(p.name, p.value);
  for (const auto& b : model.buffers()) copy_named(b.name, b.value);
}

}  // namespace deepemo
