#pragma once

#include <vector>

namespace dbd {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss–Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

// Gauss–Legendre nodes on [mean - 5 sigma, mean + 5 sigma] carrying the
// normal density N(mean, sigma^2); weights renormalized to sum to one.
QuadratureRule gaussian_weighted_rule(double mean, double sigma, int n);

}  // namespace dbd
