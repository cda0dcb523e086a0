#include "ruin/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace ruin {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("Fft: zero length");
  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW_UNALIGNED lets the plan execute on any caller buffer.
  fftw_complex* dummy = fftw_alloc_complex(n);
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), dummy, dummy, FFTW_FORWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(dummy);
  if (!plan_) throw std::runtime_error("Fft: fftw plan creation failed");
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void Fft::forward(const std::complex<double>* in, std::complex<double>* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(plan_),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace ruin
