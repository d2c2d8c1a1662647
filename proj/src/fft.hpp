#pragma once

#include <fftw3.h>

#include <cstddef>
#include <span>
#include <vector>

namespace cpr::detail {

// Real-input forward FFT of fixed length. Plan creation is serialized since
// the FFTW planner is not thread-safe; execution is not.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // |X_k|^2 for k = 0..n/2 of x zero-padded to n.
  std::vector<double> power(std::span<const double> x);

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace cpr::detail
