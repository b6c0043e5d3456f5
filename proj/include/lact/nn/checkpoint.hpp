#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lact/nn/tensor.hpp"

namespace lact::nn {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<NamedArray> arrays;

  const NamedArray& at(const std::string& name) const;
};

// Manifest text:
//   lact-checkpoint 1
//   blob <file name beside the manifest>
//   meta <key> <value>
//   tensor <name> <n>x<h>x<w>x<c> f64 <byte offset>
// The blob holds the arrays back to back as little-endian doubles.
void write_checkpoint(const std::filesystem::path& manifest, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& manifest);

}  // namespace lact::nn
