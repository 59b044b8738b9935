#pragma once

namespace nnscit {

/// psi(x) = d/dx log Gamma(x) for x > 0, absolute error below 1e-12.
///
/// Shifts the argument to x >= 6 with psi(x) = psi(x + 1) - 1/x and then
/// evaluates the asymptotic series. Throws DomainError for x <= 0 or NaN.
double digamma(double x);

}  // namespace nnscit
