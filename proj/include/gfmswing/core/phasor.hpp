#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "gfmswing/core/error.hpp"

namespace gfmswing {

// Complex per-unit quantity. Both components are finite by construction:
// every constructor and arithmetic result is checked.
class Phasor {
 public:
  constexpr Phasor() = default;
  Phasor(double re, double im) : re_(re), im_(im) { check(); }
  explicit Phasor(std::complex<double> z) : Phasor(z.real(), z.imag()) {}

  static Phasor polar(double magnitude, double angle) {
    return Phasor(magnitude * std::cos(angle), magnitude * std::sin(angle));
  }

  double re() const noexcept { return re_; }
  double im() const noexcept { return im_; }
  double magnitude() const noexcept { return std::hypot(re_, im_); }
  // Angle in (-pi, pi].
  double angle() const noexcept {
    double a = std::atan2(im_, re_);
    return a <= -std::numbers::pi ? std::numbers::pi : a;
  }
  std::complex<double> complex() const noexcept { return {re_, im_}; }
  Phasor conj() const { return Phasor(re_, -im_); }

  friend Phasor operator+(Phasor a, Phasor b) { return Phasor(a.re_ + b.re_, a.im_ + b.im_); }
  friend Phasor operator-(Phasor a, Phasor b) { return Phasor(a.re_ - b.re_, a.im_ - b.im_); }
  friend Phasor operator-(Phasor a) { return Phasor(-a.re_, -a.im_); }
  friend Phasor operator*(Phasor a, Phasor b) { return Phasor(a.complex() * b.complex()); }
  friend Phasor operator*(double k, Phasor a) { return Phasor(k * a.re_, k * a.im_); }
  friend Phasor operator*(Phasor a, double k) { return k * a; }
  friend Phasor operator/(Phasor a, Phasor b) {
    if (b.re_ == 0.0 && b.im_ == 0.0) throw InputError("phasor division by zero");
    return Phasor(a.complex() / b.complex());
  }
  friend Phasor operator/(Phasor a, double k) { return Phasor(a.re_ / k, a.im_ / k); }
  friend bool operator==(Phasor a, Phasor b) = default;

 private:
  void check() const {
    if (!std::isfinite(re_) || !std::isfinite(im_)) throw InputError("non-finite phasor component");
  }
  double re_ = 0.0;
  double im_ = 0.0;
};

// j*x: the impedance of a pure reactance.
inline Phasor jx(double x) { return Phasor(0.0, x); }

inline double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  return w <= -std::numbers::pi ? w + 2.0 * std::numbers::pi : w;
}

}  // namespace gfmswing
