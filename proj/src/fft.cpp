#include "fft.hpp"

#include <algorithm>
#include <mutex>
#include <new>

namespace cpr::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  in_ = fftw_alloc_real(n_);
  out_ = fftw_alloc_complex(n_ / 2 + 1);
  if (in_ == nullptr || out_ == nullptr) {
    fftw_free(in_);
    fftw_free(out_);
    throw std::bad_alloc();
  }
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), in_, out_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  fftw_free(in_);
  fftw_free(out_);
}

std::vector<double> RealFft::power(std::span<const double> x) {
  const std::size_t m = std::min(x.size(), n_);
  std::copy_n(x.begin(), m, in_);
  std::fill(in_ + m, in_ + n_, 0.0);
  fftw_execute(plan_);
  std::vector<double> out(n_ / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }
  return out;
}

}  // namespace cpr::detail
