#include "gailchat/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gailchat {

namespace {

void put_f32_le(std::string& out, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>((u >> 8) & 0xff));
  out.push_back(static_cast<char>((u >> 16) & 0xff));
  out.push_back(static_cast<char>((u >> 24) & 0xff));
}

float get_f32_le(const char* p) {
  std::uint32_t u = 0;
  for (int i = 3; i >= 0; --i) u = (u << 8) | static_cast<std::uint8_t>(p[i]);
  return std::bit_cast<float>(u);
}

}  // namespace

void save_checkpoint(const std::string& dir,
                     const std::vector<std::pair<std::string, NamedValues>>& tensors) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json manifest = nlohmann::json::array();
  std::string blob;
  for (const auto& [name, nv] : tensors) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = nv.shape;
    entry["dtype"] = "f32";
    entry["offset"] = blob.size();
    entry["length"] = nv.values.size() * 4;
    manifest.push_back(entry);
    for (float v : nv.values) put_f32_le(blob, v);
  }

  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("checkpoint: cannot write manifest in " + dir);
  mf << manifest.dump(2) << "\n";

  std::ofstream bf(fs::path(dir) / "params.bin", std::ios::binary);
  if (!bf) throw std::runtime_error("checkpoint: cannot write params.bin in " + dir);
  bf.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

CheckpointData load_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("checkpoint: missing manifest.json in " + dir);
  nlohmann::json manifest;
  mf >> manifest;
  if (!manifest.is_array()) throw std::runtime_error("checkpoint: manifest not an array in " + dir);

  std::ifstream bf(fs::path(dir) / "params.bin", std::ios::binary);
  if (!bf) throw std::runtime_error("checkpoint: missing params.bin in " + dir);
  std::string blob((std::istreambuf_iterator<char>(bf)), std::istreambuf_iterator<char>());

  CheckpointData out;
  for (const auto& entry : manifest) {
    const std::string name = entry.at("name").get<std::string>();
    NamedValues nv;
    nv.shape = entry.at("shape").get<Shape>();
    const std::string dtype = entry.at("dtype").get<std::string>();
    if (dtype != "f32") throw std::runtime_error("checkpoint: unsupported dtype " + dtype);
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t length = entry.at("length").get<std::size_t>();
    if (offset + length > blob.size() || length % 4 != 0)
      throw std::runtime_error("checkpoint: manifest entry " + name + " exceeds params.bin");
    std::size_t count = length / 4;
    std::size_t expect = 1;
    for (int d : nv.shape) expect *= static_cast<std::size_t>(d);
    if (expect != count)
      throw std::runtime_error("checkpoint: shape/length mismatch for " + name);
    nv.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) nv.values[i] = get_f32_le(blob.data() + offset + i * 4);
    out.emplace(name, std::move(nv));
  }
  return out;
}

template <class T>
NamedValues to_named_values(const Tensor<T>& t) {
  NamedValues nv;
  nv.shape = t.shape();
  nv.values.reserve(t.numel());
  for (T v : t.data()) nv.values.push_back(static_cast<float>(v));
  return nv;
}

template <class T>
Tensor<T> tensor_from_values(const NamedValues& nv, bool requires_grad) {
  std::vector<T> data(nv.values.begin(), nv.values.end());
  return Tensor<T>::from(nv.shape, std::move(data), requires_grad);
}

template NamedValues to_named_values(const Tensor<float>&);
template NamedValues to_named_values(const Tensor<double>&);
template Tensor<float> tensor_from_values(const NamedValues&, bool);
template Tensor<double> tensor_from_values(const NamedValues&, bool);

}  // namespace gailchat
