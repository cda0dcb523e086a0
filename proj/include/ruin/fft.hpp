#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace ruin {

// Thin wrapper over an FFTW complex-to-complex plan of fixed length.
// Plan creation is serialized internally; forward() is safe to call
// concurrently on distinct buffers.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return n_; }
  // out[k] = sum_j in[j] exp(-2*pi*i*j*k/n), unnormalized.
  void forward(const std::complex<double>* in, std::complex<double>* out) const;

 private:
  std::size_t n_;
  void* plan_;
};

}  // namespace ruin
