#pragma once

// Checkpoint directories: manifest.json (array of {name, shape, dtype:"f32",
// offset, length}) next to params.bin holding the concatenated little-endian
// IEEE-754 single-precision values, row-major, in manifest order. Offsets
// and lengths are in bytes.

#include <map>
#include <string>
#include <vector>

#include "gailchat/tensor.hpp"

namespace gailchat {

struct NamedValues {
  Shape shape;
  std::vector<float> values;
};

using CheckpointData = std::map<std::string, NamedValues>;

void save_checkpoint(const std::string& dir, const std::vector<std::pair<std::string, NamedValues>>& tensors);
CheckpointData load_checkpoint(const std::string& dir);

template <class T>
NamedValues to_named_values(const Tensor<T>& t);

template <class T>
Tensor<T> tensor_from_values(const NamedValues& nv, bool requires_grad);

}  // namespace gailchat
