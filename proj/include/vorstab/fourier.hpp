#pragma once

#include <unsupported/Eigen/FFT>

#include <vector>

#include "vorstab/types.hpp"

namespace vorstab {

// Half-spectrum DFT along theta, one transform per radial ring. Plans are
// cached per object; not safe to share across threads.
class SpectralTheta {
 public:
  explicit SpectralTheta(Index ntheta) : n_(ntheta), buf_(ntheta), spec_(ntheta / 2 + 1) {
    fft_.SetFlag(Eigen::FFT<Real>::HalfSpectrum);
  }

  Index n_modes() const { return n_ / 2 + 1; }

  // (nr, ntheta) real -> (nr, n_modes) complex, unnormalized forward DFT.
  void forward(const ArrayRT& field, ArrayRTc& spec) {
    const Index nr = field.rows();
    spec.resize(nr, n_modes());
    for (Index j = 0; j < nr; ++j) {
      for (Index k = 0; k < n_; ++k) buf_[k] = field(j, k);
      fft_.fwd(spec_, buf_);
      for (Index m = 0; m < n_modes(); ++m) spec(j, m) = spec_[m];
    }
  }

  // Inverse of forward (applies the 1/ntheta scaling).
  void inverse(const ArrayRTc& spec, ArrayRT& field) {
    const Index nr = spec.rows();
    field.resize(nr, n_);
    for (Index j = 0; j < nr; ++j) {
      for (Index m = 0; m < n_modes(); ++m) spec_[m] = spec(j, m);
      fft_.inv(buf_, spec_);
      for (Index k = 0; k < n_; ++k) field(j, k) = buf_[k];
    }
  }

  // Exact spectral d/dtheta.
  void derivative_theta(const ArrayRT& field, ArrayRT& out) {
    ArrayRTc spec;
    forward(field, spec);
    for (Index m = 0; m < n_modes(); ++m) spec.col(m) *= Complex(0, Real(m));
    if (n_ % 2 == 0) spec.col(n_ / 2) = Complex(0, 0);  // Nyquist sine partner absent
    inverse(spec, out);
  }

  // Rotate f(theta) -> f(theta + alpha) through the interpolant's phases.
  // The Nyquist coefficient is damped by cos(n/2 alpha) to stay real.
  void rotate(const ArrayRT& field, Real alpha, ArrayRT& out) {
    ArrayRTc spec;
    forward(field, spec);
    for (Index m = 0; m < n_modes(); ++m) {
      if (m == n_ / 2 && n_ % 2 == 0)
        spec.col(m) *= std::cos(Real(m) * alpha);
      else
        spec.col(m) *= std::exp(Complex(0, Real(m) * alpha));
    }
    inverse(spec, out);
  }

 private:
  Index n_;
  Eigen::FFT<Real> fft_;
  std::vector<Real> buf_;
  std::vector<Complex> spec_;
};

}  // namespace vorstab
