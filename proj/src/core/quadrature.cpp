// SPDX-License-Identifier: Apache-2.0

#include "abem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "abem/errors.hpp"

namespace abem
{

namespace
{

QuadratureRule compute_gauss(int n)
{
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i)
  {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k)
      {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
      {
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1)
  {
    rule.nodes[n / 2] = 0.5;
  }
  return rule;
}

}  // namespace

const QuadratureRule &gauss_legendre(int n)
{
  if (n < 1 || n > 256)
  {
    throw InvalidArgument("gauss_legendre: order must be in [1, 256]");
  }
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end())
  {
    it = cache.emplace(n, compute_gauss(n)).first;
  }
  return it->second;
}

QuadratureRule graded_rule(int levels, int order)
{
  if (levels < 1)
  {
    throw InvalidArgument("graded_rule: need at least one level");
  }
  const QuadratureRule &g = gauss_legendre(order);
  QuadratureRule left;
  double lo = 0.0, hi = std::ldexp(1.0, -levels);
  for (int l = 0; l < levels; ++l)
  {
    for (std::size_t q = 0; q < g.size(); ++q)
    {
      left.nodes.push_back(lo + (hi - lo) * g.nodes[q]);
      left.weights.push_back((hi - lo) * g.weights[q]);
    }
    lo = hi;
    hi *= 2.0;
  }
  QuadratureRule rule = left;
  for (std::size_t q = left.size(); q-- > 0;)
  {
    rule.nodes.push_back(1.0 - left.nodes[q]);
    rule.weights.push_back(left.weights[q]);
  }
  return rule;
}

std::vector<double> chebyshev_lobatto(int degree)
{
  if (degree < 1)
  {
    throw InvalidArgument("chebyshev_lobatto: degree must be positive");
  }
  std::vector<double> t(degree + 1);
  for (int i = 0; i <= degree; ++i)
  {
    t[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * i / degree));
  }
  t.front() = 0.0;
  t.back() = 1.0;
  return t;
}

std::vector<double> barycentric_weights(std::span<const double> nodes)
{
  std::vector<double> w(nodes.size(), 1.0);
  for (std::size_t i = 0; i < nodes.size(); ++i)
  {
    for (std::size_t j = 0; j < nodes.size(); ++j)
    {
      if (i != j)
      {
        w[i] /= nodes[i] - nodes[j];
      }
    }
  }
  return w;
}

double barycentric_eval(std::span<const double> nodes, std::span<const double> weights,
                        std::span<const double> values, double t)
{
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
  {
    const double diff = t - nodes[i];
    if (diff == 0.0)
    {
      return values[i];
    }
    const double c = weights[i] / diff;
    num += c * values[i];
    den += c;
  }
  return num / den;
}

}  // namespace abem
