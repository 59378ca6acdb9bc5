#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <cstddef>
#include <vector>

namespace eegfs::detail {

using ComplexVector = std::vector<std::complex<double>>;

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline ComplexVector fft_forward(const ComplexVector& in) {
  Eigen::FFT<double> fft;
  ComplexVector out;
  fft.fwd(out, in);
  return out;
}

/// Scaled by 1/n.
inline ComplexVector fft_inverse(const ComplexVector& in) {
  Eigen::FFT<double> fft;
  ComplexVector out;
  fft.inv(out, in);
  return out;
}

inline ComplexVector to_complex(const Eigen::VectorXd& x, std::size_t padded) {
  ComplexVector out(padded, {0.0, 0.0});
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = {x(i), 0.0};
  return out;
}

/// Symmetric Hamming window of length n.
inline Eigen::VectorXd hamming(Eigen::Index n) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (n < 2) return w;
  const double pi = std::acos(-1.0);
  for (Eigen::Index i = 0; i < n; ++i)
    w(i) = 0.54 - 0.46 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n - 1));
  return w;
}

}  // namespace eegfs::detail
