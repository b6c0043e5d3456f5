#include "lact/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lact/io.hpp"

namespace lact::nn {

namespace {

constexpr const char* kHeader = "lact-checkpoint 1";

bool valid_token(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') return false;
  return true;
}

std::string shape_text(const Shape& s) {
  return std::to_string(s.n) + "x" + std::to_string(s.h) + "x" + std::to_string(s.w) + "x" +
         std::to_string(s.c);
}

Shape parse_shape(const std::string& text, const std::filesystem::path& file) {
  std::size_t dims[4];
  std::istringstream in(text);
  for (int k = 0; k < 4; ++k) {
    if (k > 0 && in.get() != 'x') throw io::FormatError(file, "bad shape '" + text + "'");
    if (!(in >> dims[k])) throw io::FormatError(file, "bad shape '" + text + "'");
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw io::FormatError(file, "bad shape '" + text + "'");
  return Shape{dims[0], dims[1], dims[2], dims[3]};
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

const NamedArray& Checkpoint::at(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw std::out_of_range("checkpoint has no tensor '" + name + "'");
}

void write_checkpoint(const std::filesystem::path& manifest, const Checkpoint& ckpt) {
  const std::string blob_name = manifest.filename().string() + ".bin";
  std::ostringstream text;
  text << kHeader << "\n" << "blob " << blob_name << "\n";
  for (const auto& [k, v] : ckpt.meta) {
    if (!valid_token(k) || v.find('\n') != std::string::npos)
      throw std::invalid_argument("checkpoint meta entry '" + k + "' is not representable");
    text << "meta " << k << " " << v << "\n";
  }
  std::vector<std::uint8_t> blob;
  for (const auto& a : ckpt.arrays) {
    if (!valid_token(a.name))
      throw std::invalid_argument("checkpoint tensor name '" + a.name + "' is not representable");
    if (a.values.size() != a.shape.size())
      throw std::invalid_argument("checkpoint tensor '" + a.name + "' does not match its shape");
    text << "tensor " << a.name << " " << shape_text(a.shape) << " f64 " << blob.size() << "\n";
    for (double v : a.values) put_f64(blob, v);
  }
  io::write_bytes(manifest.parent_path() / blob_name, blob);
  const std::string s = text.str();
  io::write_bytes(manifest, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Checkpoint read_checkpoint(const std::filesystem::path& manifest) {
  const auto raw = io::read_bytes(manifest);
  std::istringstream text(std::string(raw.begin(), raw.end()));
  std::string line;
  if (!std::getline(text, line) || line != kHeader)
    throw io::FormatError(manifest, "not a checkpoint manifest");

  Checkpoint ckpt;
  std::string blob_name;
  struct Entry {
    NamedArray array;
    std::size_t offset;
  };
  std::vector<Entry> entries;
  std::size_t line_no = 1;
  while (std::getline(text, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    std::istringstream fields(line);
    std::string kind;
    fields >> kind;
    if (kind == "blob") {
      if (!(fields >> blob_name)) throw io::FormatError(manifest, where + "missing blob name");
    } else if (kind == "meta") {
      std::string key;
      if (!(fields >> key)) throw io::FormatError(manifest, where + "missing meta key");
      std::string value;
      std::getline(fields, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ckpt.meta[key] = value;
    } else if (kind == "tensor") {
      std::string name, shape, dtype;
      std::size_t offset = 0;
      if (!(fields >> name >> shape >> dtype >> offset))
        throw io::FormatError(manifest, where + "malformed tensor entry");
      if (dtype != "f64") throw io::FormatError(manifest, where + "unsupported dtype " + dtype);
      entries.push_back({NamedArray{name, parse_shape(shape, manifest), {}}, offset});
    } else {
      throw io::FormatError(manifest, where + "unknown entry '" + kind + "'");
    }
  }
  if (blob_name.empty()) throw io::FormatError(manifest, "no blob entry");

  const auto blob_path = manifest.parent_path() / blob_name;
  const auto blob = io::read_bytes(blob_path);
  std::size_t expected = 0;
  for (auto& e : entries) {
    const std::size_t n = e.array.shape.size();
    if (e.offset != expected)
      throw io::FormatError(manifest, "tensor '" + e.array.name + "' is out of order in the blob");
    if (e.offset + 8 * n > blob.size())
      throw io::FormatError(blob_path, "truncated at tensor '" + e.array.name + "'");
    e.array.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.array.values[i] = get_f64(blob.data() + e.offset + 8 * i);
    expected += 8 * n;
    ckpt.arrays.push_back(std::move(e.array));
  }
  if (expected != blob.size()) throw io::FormatError(blob_path, "trailing bytes after last tensor");
  return ckpt;
}

}  // namespace lact::nn
