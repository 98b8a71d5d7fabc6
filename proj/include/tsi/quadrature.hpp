#pragma once

#include <algorithm>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "tsi/errors.hpp"

namespace tsi {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule mapped to [0, 1]; nodes ascending, symmetric about 1/2.
inline QuadratureRule gauss_legendre_unit(int n) {
  if (n < 1) throw InvalidInput("gauss_legendre_unit: need at least one node");
  const auto positive = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  for (double z : positive) {
    x.push_back(z);
    if (z != 0.0) x.push_back(-z);
  }
  std::sort(x.begin(), x.end());
  QuadratureRule rule;
  for (double z : x) {
    const double dp = boost::math::legendre_p_prime<double>(n, z);
    rule.nodes.push_back(0.5 * (z + 1.0));
    rule.weights.push_back(1.0 / ((1.0 - z * z) * dp * dp));
  }
  return rule;
}

}  // namespace tsi
