#include "moddisc/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <new>
#include <memory>
#include <mutex>
#include <vector>

#include "moddisc/error.hpp"

namespace moddisc {
namespace {

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Grow-only fftw_malloc buffer.
template <class T>
class AlignedBuffer {
 public:
  ~AlignedBuffer() { fftw_free(data_); }
  T* get(std::size_t n) {
    if (n > size_) {
      fftw_free(data_);
      data_ = static_cast<T*>(fftw_malloc(n * sizeof(T)));
      if (data_ == nullptr) throw std::bad_alloc();
      size_ = n;
    }
    return data_;
  }

 private:
  T* data_ = nullptr;
  std::size_t size_ = 0;
};

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw ConfigError("FFT size must be positive");
  std::lock_guard lock(planner_mutex());
  // ESTIMATE keeps plan selection (and so rounding) identical across runs.
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE;
  r2c_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, flags);
  c2r_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, flags);
  fftw_free(real);
  fftw_free(spec);
  if (r2c_ == nullptr || c2r_ == nullptr) throw ConfigError("FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  if (r2c_) fftw_destroy_plan(static_cast<fftw_plan>(r2c_));
  if (c2r_) fftw_destroy_plan(static_cast<fftw_plan>(c2r_));
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins()) detail::throw_shape("RealFft::forward size mismatch");
  // Plans assume SIMD alignment; misaligned callers go through scratch.
  double* src = const_cast<double*>(in.data());
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  thread_local AlignedBuffer<double> in_copy;
  thread_local AlignedBuffer<fftw_complex> out_copy;
  const bool copy_in = fftw_alignment_of(src) != 0;
  const bool copy_out = fftw_alignment_of(reinterpret_cast<double*>(dst)) != 0;
  if (copy_in) {
    src = in_copy.get(n_);
    std::copy(in.begin(), in.end(), src);
  }
  fftw_complex* target = copy_out ? out_copy.get(bins()) : dst;
  // Out-of-place r2c leaves the input untouched.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), src, target);
  if (copy_out) std::memcpy(dst, target, bins() * sizeof(fftw_complex));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) detail::throw_shape("RealFft::inverse size mismatch");
  // c2r destroys its input, so it always goes through scratch.
  thread_local AlignedBuffer<fftw_complex> in_copy;
  thread_local AlignedBuffer<double> out_copy;
  fftw_complex* src = in_copy.get(bins());
  std::memcpy(src, in.data(), bins() * sizeof(fftw_complex));
  const bool copy_out = fftw_alignment_of(out.data()) != 0;
  double* dst = copy_out ? out_copy.get(n_) : out.data();
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), src, dst);
  if (copy_out) std::copy(dst, dst + n_, out.begin());
}

const RealFft& fft_plan(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace moddisc
