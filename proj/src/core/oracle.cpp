// SPDX-License-Identifier: Apache-2.0

#include "abem/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "abem/kernel.hpp"

namespace abem::oracle
{

namespace
{

constexpr double kTol = 1e-13;

boost::math::quadrature::tanh_sinh<double> &rule()
{
  thread_local boost::math::quadrature::tanh_sinh<double> r(12);
  return r;
}

template <class F>
double integrate_pieces(F &&f, std::vector<double> breaks)
{
  for (double &b : breaks)
    b = std::clamp(b, 0.0, 1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    sum += rule().integrate(f, breaks[i], breaks[i + 1], kTol);
  return sum;
}

double projection_parameter(Point2 x, const SegmentGeometry &s)
{
  const Point2 d = s.b - s.a;
  return std::clamp(dot(x - s.a, d) / dot(d, d), 0.0, 1.0);
}

// int_0^len ln|w + v dir| dv with the possible singularity at v = 0.
double log_ray_integral(Point2 w, Point2 dir, double len)
{
  if (len <= 0.0)
    return 0.0;
  auto f = [&](double v) {
    const double r = norm(w + v * dir);
    return r > 0.0 ? std::log(r) : 0.0;
  };
  return rule().integrate(f, 0.0, len, kTol);
}

}  // namespace

double log_integral(Point2 x, const SegmentGeometry &s)
{
  // Split at the foot point so that the near-singularity sits at an endpoint.
  const double u = projection_parameter(x, s);
  const Point2 tau = s.tangent();
  const Point2 w = x - s.at(u);
  return log_ray_integral(w, tau, u * s.length) +
         log_ray_integral(w, -1.0 * tau, (1.0 - u) * s.length);
}

double log_pair_integral(const SegmentGeometry &s, const SegmentGeometry &t)
{
  auto g = [&](double u) { return oracle::log_integral(s.at(u), t); };
  std::vector<double> breaks{0.0, projection_parameter(t.a, s), projection_parameter(t.b, s), 1.0};
  double u_near = 0.0, d_near = std::numeric_limits<double>::infinity();
  for (double u : std::vector<double>(breaks))
  {
    const double d = point_segment_distance(s.at(u), t);
    if (d < d_near)
    {
      d_near = d;
      u_near = u;
    }
  }
  // Touching pairs have endpoint log singularities, which tanh-sinh handles.
  if (d_near == 0.0)
    return s.length * integrate_pieces(g, std::move(breaks));
  // Separated pairs can nearly touch: grade the outer pieces toward the
  // closest approach and integrate the smooth pieces with Gauss-Kronrod.
  for (double w = d_near / s.length; w < 1.0; w *= 2.0)
  {
    breaks.push_back(u_near - w);
    breaks.push_back(u_near + w);
  }
  for (double &b : breaks)
    b = std::clamp(b, 0.0, 1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, breaks[i], breaks[i + 1],
                                                                          12, kTol);
  return s.length * sum;
}

std::vector<SegmentPair> random_segment_pairs(std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto point = [&] {
    const double r = 0.1 * std::sqrt(unit(rng));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    return Point2{r * std::cos(phi), r * std::sin(phi)};
  };
  auto direction = [&] {
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    return Point2{std::cos(phi), std::sin(phi)};
  };
  auto length = [&] { return 0.005 + 0.1 * unit(rng); };
  auto seg = [](Point2 a, Point2 dir, double h) { return SegmentGeometry{a, a + h * dir, h}; };

  std::vector<SegmentPair> pairs;
  for (std::size_t i = 0; i < count; ++i)
  {
    const Point2 p = point();
    const Point2 d = direction();
    const double h1 = length(), h2 = length();
    switch (i % 5)
    {
      case 0:
        pairs.push_back({seg(p, d, h1), seg(p, d, h1), "identical"});
        break;
      case 1:
        pairs.push_back({seg(p, d, h1), seg(p + h1 * d, d, h2), "collinear-touching"});
        break;
      case 2:
      {
        const double gap = 0.05 * unit(rng);
        pairs.push_back({seg(p, d, h1), seg(p + (h1 + gap) * d, d, h2), "collinear-gap"});
        break;
      }
      case 3:
      {
        // Second segment leaves the shared vertex at an angle in (0.05, pi - 0.05).
        const double angle = 0.05 + (std::numbers::pi - 0.1) * unit(rng);
        const Point2 q = p + h1 * d;
        const Point2 d2{std::cos(angle) * d.x - std::sin(angle) * d.y,
                        std::sin(angle) * d.x + std::cos(angle) * d.y};
        pairs.push_back({seg(p, d, h1), seg(q, d2, h2), "angled-touching"});
        break;
      }
      default:
      {
        SegmentGeometry s = seg(p, d, h1), t = seg(point(), direction(), h2);
        while (segment_distance(s, t) < 1e-3)
          t = seg(point(), direction(), h2);
        pairs.push_back({s, t, "separated"});
        break;
      }
    }
  }
  return pairs;
}

SelfTestResult selftest(std::ostream &log, std::size_t pairs, std::uint64_t seed)
{
  SelfTestResult result;
  auto check = [&](const char *what, double got, double want, double tol) {
    const double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
    ++result.checks;
    result.worst_relative_error = std::max(result.worst_relative_error, rel);
    if (rel > tol)
    {
      ++result.failures;
      log << "FAIL " << what << ": closed form " << got << ", oracle " << want
          << ", relative error " << rel << '\n';
    }
  };

  for (const auto &p : random_segment_pairs(pairs, seed))
    check(p.family, abem::log_pair_integral(p.s, p.t), oracle::log_pair_integral(p.s, p.t), 1e-8);

  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> unit(-0.2, 0.2);
  for (const auto &p : random_segment_pairs(20, seed + 2))
  {
    const Point2 x{unit(rng), unit(rng)};
    check("point-segment", abem::log_integral(x, p.s), oracle::log_integral(x, p.s), 1e-8);
  }

  const SegmentGeometry e0{{0, 0}, {1, 0}, 1.0}, e1{{1, 0}, {2, 0}, 1.0};
  check("unit self entry", kLaplaceFactor * abem::log_pair_integral(e0, e0),
        kLaplaceFactor * oracle::log_pair_integral(e0, e0), 1e-8);
  check("unit adjacent entry", kLaplaceFactor * abem::log_pair_integral(e0, e1),
        kLaplaceFactor * oracle::log_pair_integral(e0, e1), 1e-8);
  const SegmentGeometry f0{{0, 0}, {0.5, 0}, 0.5}, f1{{0.5, 0}, {1, 0}, 0.5};
  const double haar = 2.0 * kLaplaceFactor *
                      (abem::log_pair_integral(f0, f0) - abem::log_pair_integral(f0, f1));
  const double haar_oracle = 2.0 * kLaplaceFactor *
                             (oracle::log_pair_integral(f0, f0) - oracle::log_pair_integral(f0, f1));
  check("haar denominator", haar, haar_oracle, 1e-8);

  log << "oracle self-test: " << result.checks << " checks, " << result.failures
      << " failures, worst relative error " << result.worst_relative_error << '\n';
  return result;
}

}  // namespace abem::oracle
