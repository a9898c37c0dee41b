#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace photon_reshape::detail {

using Eigen::ArrayXcd;
using Eigen::VectorXcd;

/// One FFT plan cache per thread; Eigen::FFT instances are not thread-safe.
inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

/// Multiply samples by (-1)^j in place. Re-centers the DFT so that index n/2
/// of the output corresponds to zero offset of the conjugate axis. Valid for
/// n divisible by 4, where the residual global phase exp(2*pi*i*n/4) is 1.
inline void alternate_signs(ArrayXcd& a) {
  for (Eigen::Index j = 1; j < a.size(); j += 2) a[j] = -a[j];
}

/// Centered discrete analog of F(nu_k) = dx * sum_j f(x_j) exp(+i nu_k u_j)
/// with u_j = (j - n/2) dx and nu_k = (k - n/2) * 2pi/(n dx).
inline ArrayXcd centered_forward(const ArrayXcd& samples, double dx) {
  const Eigen::Index n = samples.size();
  ArrayXcd work = samples;
  alternate_signs(work);
  VectorXcd out(n);
  fft_engine().inv(out, VectorXcd(work.matrix()));  // (1/n) sum e^{+2pi i jk/n}
  ArrayXcd result = out.array() * (dx * static_cast<double>(n));
  alternate_signs(result);
  return result;
}

/// Exact inverse of centered_forward for the same n and dx.
inline ArrayXcd centered_inverse(const ArrayXcd& spectrum, double dx) {
  const Eigen::Index n = spectrum.size();
  ArrayXcd work = spectrum;
  alternate_signs(work);
  VectorXcd out(n);
  fft_engine().fwd(out, VectorXcd(work.matrix()));  // sum e^{-2pi i jk/n}
  ArrayXcd result = out.array() / (dx * static_cast<double>(n));
  alternate_signs(result);
  return result;
}

}  // namespace photon_reshape::detail
