#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lact/raster.hpp"

namespace lact::io {

/// Malformed or unreadable file. The message names the file.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::filesystem::path& file, const std::string& what)
      : std::runtime_error(file.string() + ": " + what), file_(file) {}
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
};

enum class Dtype : std::uint8_t { f32 = 0x00, f64 = 0x01 };

/// Contents of a LACT tensor file: row-major values widened to double.
struct LactTensor {
  Dtype dtype = Dtype::f64;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

// LACT layout: "LACT" | version 0x01 | dtype | ndim | 0x00 | ndim x u32 LE dims | payload (LE).
std::vector<std::uint8_t> encode_lact(const LactTensor& t);
LactTensor decode_lact(std::span<const std::uint8_t> bytes, const std::filesystem::path& origin);

void write_lact(const std::filesystem::path& path, const LactTensor& t);
LactTensor read_lact(const std::filesystem::path& path);

void write_array(const std::filesystem::path& path, const Array2& a, Dtype dtype = Dtype::f64);
Array2 read_array(const std::filesystem::path& path);

/// 16-bit binary PGM with the display window in a comment line.
struct Pgm {
  std::size_t width = 0;
  std::size_t height = 0;
  double window_min = 0.0;
  double window_max = 0.0;
  std::vector<std::uint16_t> pixels;
};

Pgm to_pgm(const Array2& values);
void write_pgm(const std::filesystem::path& path, const Pgm& pgm);
Pgm read_pgm(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

}  // namespace lact::io
