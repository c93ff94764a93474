#pragma once

// Checkpoint store: one directory per checkpoint holding manifest.json
// (dtype, kind, config echo, per-tensor name/shape/frozen) and params.bin
// (the tensors, concatenated in manifest order).

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/format.hpp"
#include "mmgf/nn.hpp"

namespace mmgf {

// Order-sensitive digest over parameter names and value bytes; used to prove
// frozen tensors were untouched.
template <class S>
std::uint64_t params_fingerprint(const std::vector<Parameter<S>*>& params) {
  std::uint64_t h = fnv1a64("params");
  for (const auto* p : params) {
    h = fnv1a64(p->name, h);
    h = fnv1a64(p->value.data(), p->value.size() * sizeof(S), h);
  }
  return h;
}

template <class S>
void save_checkpoint(const std::filesystem::path& dir, const std::string& kind,
                     const nlohmann::json& config,
                     const std::vector<Parameter<S>*>& params,
                     const nlohmann::json& extra = nlohmann::json::object()) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = 1;
  manifest["kind"] = kind;
  manifest["dtype"] = dtype_of<S>::value == Dtype::f32 ? "f32" : "f64";
  manifest["config"] = config;
  if (!extra.empty()) manifest["extra"] = extra;
  nlohmann::json tensors = nlohmann::json::array();
  std::vector<std::uint8_t> blob;
  for (const auto* p : params) {
    tensors.push_back({{"name", p->name},
                       {"shape", p->value.shape()},
                       {"frozen", p->frozen}});
    const auto bytes = encode_tensor(p->value);
    blob.insert(blob.end(), bytes.begin(), bytes.end());
  }
  manifest["tensors"] = tensors;
  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw RuntimeFailure("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << "\n";
  }
  write_file_bytes(dir / "params.bin", blob);
}

inline nlohmann::json load_checkpoint_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in)
    throw ValidationError("checkpoint manifest not found: " +
                          (dir / "manifest.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("bad checkpoint manifest " +
                          (dir / "manifest.json").string() + ": " + e.what());
  }
  return j;
}

// Fills an already-constructed parameter list (the model built from the
// manifest's config echo) by name order; shapes and dtype must match.
template <class S>
nlohmann::json load_checkpoint(const std::filesystem::path& dir,
                               const std::vector<Parameter<S>*>& params) {
  const nlohmann::json manifest = load_checkpoint_manifest(dir);
  const std::string want_dtype = dtype_of<S>::value == Dtype::f32 ? "f32" : "f64";
  if (manifest.at("dtype").get<std::string>() != want_dtype)
    throw ValidationError("checkpoint " + dir.string() + " holds " +
                          manifest.at("dtype").get<std::string>() +
                          " tensors, expected " + want_dtype);
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != params.size())
    throw ValidationError("checkpoint " + dir.string() + " has " +
                          std::to_string(tensors.size()) + " tensors, model has " +
                          std::to_string(params.size()));
  const auto blob = read_file_bytes(dir / "params.bin");
  size_t offset = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& entry = tensors[i];
    Parameter<S>* p = params[i];
    if (entry.at("name").get<std::string>() != p->name)
      throw ValidationError("checkpoint tensor " + std::to_string(i) + " is '" +
                            entry.at("name").get<std::string>() +
                            "', model expects '" + p->name + "'");
    Tensor<S> t = decode_tensor<S>(blob, offset, dir.string() + ":" + p->name);
    if (!t.same_shape(p->value))
      throw ValidationError("checkpoint tensor '" + p->name + "' shape " +
                            t.shape_str() + " != model shape " +
                            p->value.shape_str());
    p->value = std::move(t);
    p->frozen = entry.at("frozen").get<bool>();
  }
  if (offset != blob.size())
    throw ValidationError("checkpoint " + dir.string() + ": trailing bytes in params.bin");
  return manifest;
}

}  // namespace mmgf
