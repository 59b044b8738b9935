#include "nnscit/digamma.hpp"

#include <cmath>
#include <string>

#include "nnscit/error.hpp"

namespace nnscit {

double digamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    throw DomainError("digamma requires a finite positive argument, got " + std::to_string(x));
  }
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // Bernoulli-number coefficients B_{2j} / (2j) up to x^-14.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

}  // namespace nnscit
