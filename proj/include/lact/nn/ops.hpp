#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lact/nn/tensor.hpp"
#include "lact/rng.hpp"

namespace lact::nn {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double k);
/// a * s for a single-element tensor s; gradients flow to both.
Tensor mul_scalar(const Tensor& a, const Tensor& s);
/// max(x, 0); the subgradient at 0 is 0.
Tensor relu(const Tensor& x);

Tensor sum(const Tensor& x);
/// sum_i a_i b_i for same-shaped a and b.
Tensor dot(const Tensor& a, const Tensor& b);
Tensor sum_squares(const Tensor& x);

/// 5x5 (or any odd size) "same" cross-correlation with zero padding:
/// out(b,i,j,o) = sum x(b, i+di-r, j+dj-r, c) f(di,dj,c,o) + bias(o).
/// filters: (kh, kw, in, out); bias: (1,1,1,out).
Tensor conv2d(const Tensor& x, const Tensor& filters, const Tensor& bias);

struct ConvParams {
  Tensor filters;
  Tensor bias;
};

/// Glorot-uniform filters, +-sqrt(6 / (fan_in + fan_out)), and zero bias.
ConvParams make_conv(std::size_t k, std::size_t in, std::size_t out, Rng& rng,
                     const std::string& name);

struct BnParams {
  Tensor scale;   // tau, (1,1,1,ch)
  Tensor offset;  // kappa, (1,1,1,ch)
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.99;
  double eps = 1e-3;

  std::size_t channels() const { return running_mean.size(); }
};

BnParams make_bn(std::size_t channels, const std::string& name);

/// Batch normalisation over (batch, height, width) per channel. Training
/// mode normalises with batch moments and folds them into the running
/// averages; inference uses the running averages.
Tensor batchnorm(const Tensor& x, BnParams& p, bool training);

/// Unitary 2-D DFT of a (b, h, w, 2) tensor holding (real, imaginary).
Tensor fft2(const Tensor& x);
Tensor ifft2(const Tensor& x);

/// (b,h,w,1) -> (b,h,w,2) with zero imaginary channel.
Tensor to_complex(const Tensor& x);
/// (b,h,w,2) -> (b,h,w,1), the real channel.
Tensor real_part(const Tensor& x);

/// (b,h,w,c) -> (b*c,h,w,1); channel k of sample i lands at batch i*c + k.
Tensor channels_to_batch(const Tensor& x);
/// Inverse of channels_to_batch.
Tensor batch_to_channels(const Tensor& x, std::size_t channels);

}  // namespace lact::nn
