// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_ORACLE_HPP
#define ABEM_ORACLE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "abem/geometry.hpp"

// Brute-force adaptive quadrature of the log kernel. Slow, independent of the
// closed forms in kernel.hpp, used to check them.
namespace abem::oracle
{

double log_integral(Point2 x, const SegmentGeometry &s);
double log_pair_integral(const SegmentGeometry &s, const SegmentGeometry &t);

struct SegmentPair
{
  SegmentGeometry s;
  SegmentGeometry t;
  const char *family;
};

// Collinear, touching at an angle, and separated pairs inside a disc of
// diameter 1/2.
std::vector<SegmentPair> random_segment_pairs(std::size_t count, std::uint64_t seed);

struct SelfTestResult
{
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst_relative_error = 0.0;
};

// Compares the closed-form integrals with the oracle and prints one line per
// failed check (or a summary) to `log`.
SelfTestResult selftest(std::ostream &log, std::size_t pairs = 100, std::uint64_t seed = 7);

}  // namespace abem::oracle

#endif  // ABEM_ORACLE_HPP
