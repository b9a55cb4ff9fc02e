// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_QUADRATURE_HPP
#define ABEM_QUADRATURE_HPP

#include <span>
#include <vector>

namespace abem
{

// Nodes and weights on the reference interval [0, 1].
struct QuadratureRule
{
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// n-point Gauss-Legendre rule, cached per n.
const QuadratureRule &gauss_legendre(int n);

// Composite Gauss rule on [0, 1], graded dyadically toward both endpoints:
// pieces [0, 2^-L], [2^-L, 2^-L+1], ..., [1/4, 1/2] and their mirror images.
QuadratureRule graded_rule(int levels, int order);

// degree+1 Chebyshev-Lobatto points on [0, 1], increasing.
std::vector<double> chebyshev_lobatto(int degree);

// Barycentric weights for interpolation through `nodes`.
std::vector<double> barycentric_weights(std::span<const double> nodes);
double barycentric_eval(std::span<const double> nodes, std::span<const double> weights,
                        std::span<const double> values, double t);

}  // namespace abem

#endif  // ABEM_QUADRATURE_HPP
