#pragma once

#include <vector>

namespace latgl {

/// Real polynomial in lambda, ascending coefficients. The zero polynomial has
/// no coefficients and degree -1.
struct Polynomial {
  std::vector<double> coeffs;

  int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
  bool is_zero() const noexcept { return coeffs.empty(); }
  double leading() const noexcept { return coeffs.empty() ? 0.0 : coeffs.back(); }

  double operator()(double lambda) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * lambda + *it;
    return acc;
  }

  /// this += scale * other
  void add_scaled(const Polynomial& other, double scale);
  /// this += scale * lambda * other
  void add_shifted_scaled(const Polynomial& other, double scale);
  void scale(double s);

  /// Zero every coefficient below rel * max|coeff| and drop trailing zeros.
  void truncate(double rel);

  bool operator==(const Polynomial&) const = default;
};

}  // namespace latgl
