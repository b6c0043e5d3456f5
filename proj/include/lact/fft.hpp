#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace lact::fft {

enum class Direction { forward, inverse };

/// In-place unnormalised 1-D DFT of any length.
void transform(std::span<std::complex<double>> data, Direction dir);

/// In-place unnormalised 2-D DFT of a row-major rows x cols array.
void transform_2d(std::span<std::complex<double>> data, std::size_t rows, std::size_t cols,
                  Direction dir);

/// 2-D DFT scaled by 1/sqrt(rows*cols) in both directions, so the
/// transform is unitary.
void unitary_2d(std::span<std::complex<double>> data, std::size_t rows, std::size_t cols,
                Direction dir);

std::size_t next_pow2(std::size_t n);

}  // namespace lact::fft
