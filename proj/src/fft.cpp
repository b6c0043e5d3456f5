#include "lact/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace lact::fft {

namespace {

// FFTW plans are bound to buffer alignment, so each cached plan owns an
// aligned scratch buffer that callers' data is copied through.
struct CachedPlan {
  fftw_plan plan = nullptr;
  fftw_complex* buffer = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.plan);
      fftw_free(p.buffer);
    }
  }

  void run(std::span<std::complex<double>> data, std::size_t rows, std::size_t cols,
           Direction dir) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rows, cols, dir == Direction::forward);
    auto it = plans_.find(key);
    if (it == plans_.end()) {
      CachedPlan p;
      p.buffer = fftw_alloc_complex(rows * cols);
      const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
      if (rows == 1)
        p.plan = fftw_plan_dft_1d(static_cast<int>(cols), p.buffer, p.buffer, sign, FFTW_ESTIMATE);
      else
        p.plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), p.buffer,
                                  p.buffer, sign, FFTW_ESTIMATE);
      if (p.plan == nullptr) throw std::runtime_error("fft: failed to create plan");
      it = plans_.emplace(key, p).first;
    }
    auto* buf = reinterpret_cast<std::complex<double>*>(it->second.buffer);
    std::copy(data.begin(), data.end(), buf);
    fftw_execute(it->second.plan);
    std::copy(buf, buf + data.size(), data.begin());
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, bool>, CachedPlan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void transform(std::span<std::complex<double>> data, Direction dir) {
  if (data.empty()) return;
  cache().run(data, 1, data.size(), dir);
}

void transform_2d(std::span<std::complex<double>> data, std::size_t rows, std::size_t cols,
                  Direction dir) {
  if (data.size() != rows * cols) throw std::invalid_argument("fft: data size mismatch");
  if (data.empty()) return;
  cache().run(data, rows, cols, dir);
}

void unitary_2d(std::span<std::complex<double>> data, std::size_t rows, std::size_t cols,
                Direction dir) {
  transform_2d(data, rows, cols, dir);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows * cols));
  for (auto& v : data) v *= scale;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace lact::fft
