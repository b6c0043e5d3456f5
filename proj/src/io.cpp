#include "lact/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lact::io {

namespace {

constexpr std::uint8_t kVersion = 0x01;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

template <class Bits>
void put_le(std::vector<std::uint8_t>& out, Bits bits) {
  for (std::size_t i = 0; i < sizeof(Bits); ++i)
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <class Bits>
Bits get_le(std::span<const std::uint8_t> b, std::size_t at) {
  Bits v = 0;
  for (std::size_t i = 0; i < sizeof(Bits); ++i) v |= static_cast<Bits>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_lact(const LactTensor& t) {
  std::size_t count = 1;
  for (auto d : t.dims) count *= d;
  if (count != t.values.size()) throw std::invalid_argument("LACT: dims do not match payload");
  if (t.dims.size() > 255) throw std::invalid_argument("LACT: too many dimensions");
  std::vector<std::uint8_t> out{'L', 'A', 'C', 'T', kVersion, static_cast<std::uint8_t>(t.dtype),
                                static_cast<std::uint8_t>(t.dims.size()), 0x00};
  for (auto d : t.dims) put_u32(out, d);
  out.reserve(out.size() + count * (t.dtype == Dtype::f64 ? 8 : 4));
  for (double v : t.values) {
    if (t.dtype == Dtype::f64)
      put_le(out, std::bit_cast<std::uint64_t>(v));
    else
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

LactTensor decode_lact(std::span<const std::uint8_t> b, const std::filesystem::path& origin) {
  if (b.size() < 8) throw FormatError(origin, "truncated LACT header");
  if (std::memcmp(b.data(), "LACT", 4) != 0) throw FormatError(origin, "bad LACT magic bytes");
  if (b[4] != kVersion)
    throw FormatError(origin, "unsupported LACT version " + std::to_string(b[4]));
  if (b[5] != 0x00 && b[5] != 0x01)
    throw FormatError(origin, "unknown LACT dtype " + std::to_string(b[5]));
  if (b[7] != 0x00) throw FormatError(origin, "nonzero LACT reserved byte");
  LactTensor t;
  t.dtype = static_cast<Dtype>(b[5]);
  const std::size_t ndim = b[6];
  if (b.size() < 8 + 4 * ndim) throw FormatError(origin, "truncated LACT dims");
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    t.dims.push_back(get_u32(b, 8 + 4 * i));
    count *= t.dims.back();
  }
  const std::size_t width = t.dtype == Dtype::f64 ? 8 : 4;
  const std::size_t start = 8 + 4 * ndim;
  if (b.size() != start + count * width)
    throw FormatError(origin, "LACT payload size does not match dims");
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto at = start + i * width;
    t.values[i] = t.dtype == Dtype::f64
                      ? std::bit_cast<double>(get_le<std::uint64_t>(b, at))
                      : static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(b, at)));
  }
  return t;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, "cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_lact(const std::filesystem::path& path, const LactTensor& t) {
  write_bytes(path, encode_lact(t));
}

LactTensor read_lact(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return decode_lact(bytes, path);
}

void write_array(const std::filesystem::path& path, const Array2& a, Dtype dtype) {
  write_lact(path, LactTensor{dtype,
                              {static_cast<std::uint32_t>(a.rows()),
                               static_cast<std::uint32_t>(a.cols())},
                              a.storage()});
}

Array2 read_array(const std::filesystem::path& path) {
  auto t = read_lact(path);
  if (t.dims.size() != 2) throw FormatError(path, "expected a 2-D LACT tensor");
  return Array2(t.dims[0], t.dims[1], std::move(t.values));
}

Pgm to_pgm(const Array2& values) {
  Pgm p;
  p.width = values.cols();
  p.height = values.rows();
  if (values.size() == 0) return p;
  const auto [lo, hi] = std::minmax_element(values.flat().begin(), values.flat().end());
  p.window_min = *lo;
  p.window_max = *hi;
  const double span = p.window_max - p.window_min;
  p.pixels.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = span > 0.0 ? (values.flat()[i] - p.window_min) / span : 0.0;
    p.pixels[i] = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
  }
  return p;
}

void write_pgm(const std::filesystem::path& path, const Pgm& pgm) {
  std::ostringstream head;
  head << "P5\n# window " << format_double(pgm.window_min) << ' '
       << format_double(pgm.window_max) << '\n'
       << pgm.width << ' ' << pgm.height << "\n65535\n";
  const auto text = head.str();
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  for (auto px : pgm.pixels) {
    bytes.push_back(static_cast<std::uint8_t>(px >> 8));
    bytes.push_back(static_cast<std::uint8_t>(px & 0xff));
  }
  write_bytes(path, bytes);
}

Pgm read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  auto read_line = [&]() {
    const auto start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) throw FormatError(path, "truncated PGM header");
    std::string line(bytes.begin() + static_cast<long>(start), bytes.begin() + static_cast<long>(pos));
    ++pos;
    return line;
  };
  if (read_line() != "P5") throw FormatError(path, "not a binary PGM");
  Pgm p;
  {
    std::istringstream in(read_line());
    std::string hash, key, lo, hi;
    in >> hash >> key >> lo >> hi;
    if (hash != "#" || key != "window") throw FormatError(path, "missing PGM window comment");
    p.window_min = parse_double(lo);
    p.window_max = parse_double(hi);
  }
  {
    std::istringstream in(read_line());
    if (!(in >> p.width >> p.height)) throw FormatError(path, "bad PGM dimensions");
  }
  if (read_line() != "65535") throw FormatError(path, "expected 16-bit PGM");
  const std::size_t n = p.width * p.height;
  if (bytes.size() - pos != 2 * n) throw FormatError(path, "PGM payload size mismatch");
  p.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    p.pixels[i] = static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
  return p;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

}  // namespace lact::io
