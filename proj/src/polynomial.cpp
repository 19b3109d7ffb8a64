#include "latgl/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace latgl {

void Polynomial::add_scaled(const Polynomial& other, double s) {
  if (s == 0.0 || other.is_zero()) return;
  if (coeffs.size() < other.coeffs.size()) coeffs.resize(other.coeffs.size(), 0.0);
  for (std::size_t k = 0; k < other.coeffs.size(); ++k) coeffs[k] += s * other.coeffs[k];
}

void Polynomial::add_shifted_scaled(const Polynomial& other, double s) {
  if (s == 0.0 || other.is_zero()) return;
  if (coeffs.size() < other.coeffs.size() + 1) coeffs.resize(other.coeffs.size() + 1, 0.0);
  for (std::size_t k = 0; k < other.coeffs.size(); ++k) coeffs[k + 1] += s * other.coeffs[k];
}

void Polynomial::scale(double s) {
  for (double& c : coeffs) c *= s;
}

void Polynomial::truncate(double rel) {
  double big = 0.0;
  for (double c : coeffs) big = std::max(big, std::abs(c));
  const double cut = rel * big;
  for (double& c : coeffs)
    if (std::abs(c) < cut) c = 0.0;
  while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
}

}  // namespace latgl
