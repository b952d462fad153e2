#pragma once

namespace saftlab::meyer {

/// Transition polynomial v(x) = x^4 (35 - 84x + 70x^2 - 20x^3), clamped to
/// 0 below 0 and 1 above 1.
double v(double x);

/// Frequency window: 1 on |x| <= 1/3, cos(v(3|x| - 1) pi / 2) up to 2/3, else 0.
double psi(double x);

/// Inverse Fourier transform of psi,
///   psi_check(t) = 2 int_0^{2/3} psi(w) cos(2 pi t w) dw,
/// evaluated with the flat part in closed form and Gauss-Legendre panels on
/// the transition band. Accurate to about 1e-15 absolute.
double psi_check(double t);

} // namespace saftlab::meyer
