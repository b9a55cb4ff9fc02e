// SPDX-License-Identifier: Apache-2.0

#include "abem/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "abem/errors.hpp"
#include "abem/kernel.hpp"
#include "abem/quadrature.hpp"

namespace abem
{

const char *to_string(EstimatorKind kind)
{
  switch (kind)
  {
    case EstimatorKind::Faermann:
      return "faermann";
    case EstimatorKind::TwoLevel:
      return "two_level";
    case EstimatorKind::WeightedResidual:
      return "weighted_residual";
    case EstimatorKind::RhoModified:
      return "rho_modified";
  }
  return "?";
}

std::optional<EstimatorKind> parse_estimator(std::string_view name)
{
  for (auto k : {EstimatorKind::Faermann, EstimatorKind::TwoLevel, EstimatorKind::WeightedResidual,
                 EstimatorKind::RhoModified})
    if (name == to_string(k))
      return k;
  return std::nullopt;
}

double EstimatorReport::total_sq() const
{
  double s = 0.0;
  for (double v : local)
    s += v * v;
  return s;
}

double EstimatorReport::total() const { return std::sqrt(total_sq()); }

double EstimatorReport::subset_sq(std::span<const std::size_t> elements) const
{
  double s = 0.0;
  for (std::size_t e : elements)
    s += local.at(e) * local.at(e);
  return s;
}

ResidualData make_residual(EquationTag equation, const RightHandSide &f, const Density &u)
{
  if (u.space.kind() != space_kind(equation))
    throw InvalidArgument(std::string("density space ") + to_string(u.space.kind()) +
                          " does not match equation " + to_string(equation));
  ResidualData r;
  r.equation = equation;
  r.f = f;
  r.mesh = u.space.mesh_ptr();
  r.defect = u.coefficients;
  if (f.synthetic)
    r.defect -= prolong(*f.synthetic, r.mesh).coefficients;
  r.psi = equation == EquationTag::WeaklySingular ? r.defect : arc_derivative(u.space, r.defect);
  if (equation == EquationTag::HypersingularStabilized)
    r.mean = basis_integrals(u.space).dot(u.coefficients);
  return r;
}

namespace
{

double potential(const ResidualData &r, Point2 x)
{
  return single_layer_at(*r.mesh, {r.psi.data(), r.mesh->size()}, x);
}

double potential_derivative(const ResidualData &r, Point2 x, Point2 tangent)
{
  return single_layer_derivative_at(*r.mesh, {r.psi.data(), r.mesh->size()}, x, tangent);
}

bool weakly(const ResidualData &r) { return r.equation == EquationTag::WeaklySingular; }

double analytic_value(const ResidualData &r, const TraceSample &s)
{
  return r.f.has_analytic() ? r.f.value(s) : 0.0;
}

}  // namespace

double residual_value(const ResidualData &r, std::size_t element, double t)
{
  const Segment &seg = r.mesh->element(element);
  const TraceSample s = trace_sample(seg, t);
  if (weakly(r))
    return analytic_value(r, s) - potential(r, s.x);
  return analytic_value(r, s) + potential_derivative(r, s.x, s.tangent) - r.mean;
}

// ---------------------------------------------------------------------------
// Faermann

namespace
{

struct Interpolant
{
  std::vector<double> coeffs;  // monomials in xi = 2t - 1

  double operator()(double t) const
  {
    const double xi = 2.0 * t - 1.0;
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;)
      v = v * xi + coeffs[k];
    return v;
  }

  // (p(s) - p(t)) / (s - t), a polynomial in both arguments. For xi^k this
  // is the complete homogeneous sum h_{k-1}(a, b), h_m = a h_{m-1} + b^m.
  double divided_difference(double s, double t) const
  {
    const double a = 2.0 * s - 1.0, b = 2.0 * t - 1.0;
    double sum = 0.0, hm = 1.0, bp = 1.0;
    for (std::size_t k = 1; k < coeffs.size(); ++k)
    {
      sum += coeffs[k] * hm;
      bp *= b;
      hm = a * hm + bp;
    }
    return 2.0 * sum;
  }
};

class InterpolationBasis
{
public:
  explicit InterpolationBasis(int degree) : nodes_(chebyshev_lobatto(degree))
  {
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    Eigen::MatrixXd v(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k)
        v(i, k) = std::pow(2.0 * nodes_[i] - 1.0, static_cast<double>(k));
    inverse_ = v.inverse();
  }

  const std::vector<double> &nodes() const { return nodes_; }

  Interpolant fit(std::span<const double> values) const
  {
    const Eigen::Map<const Eigen::VectorXd> y(values.data(), static_cast<Eigen::Index>(values.size()));
    const Eigen::VectorXd c = inverse_ * y;
    return {std::vector<double>(c.data(), c.data() + c.size())};
  }

private:
  std::vector<double> nodes_;
  Eigen::MatrixXd inverse_;
};

// Breakpoints 0, 2^-m, ..., 1/2, 1 on [0, 1].
std::vector<double> dyadic_breaks(int m)
{
  std::vector<double> b{0.0};
  for (int k = m; k >= 1; --k)
    b.push_back(std::ldexp(1.0, -k));
  b.push_back(1.0);
  return b;
}

double self_seminorm_sq(const Interpolant &p, const QuadratureRule &g)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
    {
      const double dd = p.divided_difference(g.nodes[i], g.nodes[j]);
      sum += g.weights[i] * g.weights[j] * dd * dd;
    }
  return sum;
}

// int_L int_R |pL(x) - pR(y)|^2 / |x - y|^2 for L ending and R starting at the
// shared node, graded toward it.
double cross_seminorm_sq(const Segment &left, const Interpolant &pl, const Segment &right,
                         const Interpolant &pr, const QuadratureRule &g, int subdivisions)
{
  const Point2 tl = left.geom.tangent(), tr = right.geom.tangent();
  const double hl = left.length(), hr = right.length();
  const auto breaks = dyadic_breaks(subdivisions);
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < breaks.size(); ++a)
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b)
    {
      const double a0 = breaks[a], a1 = breaks[a + 1];
      const double b0 = breaks[b], b1 = breaks[b + 1];
      for (std::size_t i = 0; i < g.size(); ++i)
      {
        const double u = a0 + (a1 - a0) * g.nodes[i];  // distance fraction from the node on L
        const double wi = (a1 - a0) * g.weights[i] * hl;
        const double vl = pl(1.0 - u);
        for (std::size_t j = 0; j < g.size(); ++j)
        {
          const double v = b0 + (b1 - b0) * g.nodes[j];
          const double wj = (b1 - b0) * g.weights[j] * hr;
          const Point2 diff = (u * hl) * tl + (v * hr) * tr;
          const double r2 = dot(diff, diff);
          const double du = vl - pr(v);
          sum += wi * wj * du * du / r2;
        }
      }
    }
  return sum;
}

double node_seminorm_sq(const BoundaryMesh &mesh, std::size_t node,
                        const std::vector<Interpolant> &p, const SlobodeckijQuadrature &quad)
{
  const QuadratureRule &g = gauss_legendre(quad.gauss_order);
  const auto elements = mesh.node_elements(node);
  double sum = 0.0;
  for (std::size_t e : elements)
    sum += self_seminorm_sq(p[e], g);
  if (elements.size() == 2)
  {
    const std::size_t l = elements[0], r = elements[1];
    sum += 2.0 * cross_seminorm_sq(mesh.element(l), p[l], mesh.element(r), p[r], g,
                                   quad.diagonal_subdivisions);
  }
  return sum;
}

void check_quadrature(const SlobodeckijQuadrature &quad)
{
  if (quad.interpolation_degree < 2 || quad.gauss_order < 1 || quad.diagonal_subdivisions < 1)
    throw InvalidArgument("Slobodeckij quadrature parameters out of range");
}

}  // namespace

double patch_seminorm_sq(const BoundaryMesh &mesh, std::size_t node,
                         const std::function<double(std::size_t, double)> &r,
                         const SlobodeckijQuadrature &quad)
{
  check_quadrature(quad);
  const InterpolationBasis basis(quad.interpolation_degree);
  std::vector<Interpolant> p(mesh.size());
  std::vector<double> values(basis.nodes().size());
  for (std::size_t e : mesh.node_elements(node))
  {
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] = r(e, basis.nodes()[i]);
    p[e] = basis.fit(values);
  }
  return node_seminorm_sq(mesh, node, p, quad);
}

EstimatorReport faermann(const RightHandSide &f, const Density &u, const EstimatorOptions &opts)
{
  if (u.space.kind() != SpaceKind::P0)
    throw InvalidArgument("faermann: defined for the weakly-singular equation only");
  if (f.regularity < Regularity::HHalf)
    throw InvalidArgument("faermann: right-hand side must be tagged H_half or H_one");
  check_quadrature(opts.slobodeckij);
  const ResidualData r = make_residual(EquationTag::WeaklySingular, f, u);
  const BoundaryMesh &mesh = *r.mesh;
  const InterpolationBasis basis(opts.slobodeckij.interpolation_degree);
  const auto &t = basis.nodes();

  // Nodal values are shared by the two elements of each node.
  std::vector<double> nodal(mesh.node_count());
  for (std::size_t n = 0; n < mesh.node_count(); ++n)
  {
    const std::size_t e = n < mesh.size() ? n : mesh.size() - 1;
    const double tn = n < mesh.size() ? 0.0 : 1.0;
    const TraceSample s = trace_sample(mesh.element(e), tn);
    nodal[n] = analytic_value(r, s) - potential(r, s.x);
  }
  std::vector<Interpolant> p(mesh.size());
  std::vector<double> values(t.size());
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    values.front() = nodal[mesh.start_node(e)];
    values.back() = nodal[mesh.end_node(e)];
    for (std::size_t i = 1; i + 1 < t.size(); ++i)
      values[i] = residual_value(r, e, t[i]);
    p[e] = basis.fit(values);
  }

  EstimatorReport report;
  report.kind = EstimatorKind::Faermann;
  report.equation = EquationTag::WeaklySingular;
  report.level = mesh.level();
  std::vector<double> sq(mesh.size(), 0.0);
  for (std::size_t n = 0; n < mesh.node_count(); ++n)
  {
    const double s = node_seminorm_sq(mesh, n, p, opts.slobodeckij);
    // Each element collects the seminorms of its own nodes.
    for (std::size_t e : mesh.node_elements(n))
      sq[e] += s;
  }
  report.local.resize(mesh.size());
  for (std::size_t e = 0; e < mesh.size(); ++e)
    report.local[e] = std::sqrt(sq[e]);
  return report;
}

// ---------------------------------------------------------------------------
// Two-level

namespace
{

struct Sons
{
  SegmentGeometry left, right;
};

Sons sons(const Segment &s)
{
  const Point2 m = midpoint(s.geom.a, s.geom.b);
  const double h = 0.5 * s.length();
  return {{s.geom.a, m, h}, {m, s.geom.b, h}};
}

// <V psi, chi_left - chi_right> for the sons of `element`.
double haar_action(const ResidualData &r, std::size_t element, const Sons &so)
{
  const BoundaryMesh &mesh = *r.mesh;
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    if (r.psi[e] == 0.0)
      continue;
    const SegmentGeometry &g = mesh.element(e).geom;
    double diff;
    if (e == element)
      diff = 0.0;  // the two sons see the parent symmetrically
    else
      diff = log_pair_integral(so.left, g) - log_pair_integral(so.right, g);
    sum += r.psi[e] * diff;
  }
  return kLaplaceFactor * sum;
}

double haar_energy(const Sons &so)
{
  return kLaplaceFactor * (log_pair_integral(so.left, so.left) + log_pair_integral(so.right, so.right) -
                           2.0 * log_pair_integral(so.left, so.right));
}

// int F w over the sons with weights (left, right) given as functions of the
// son parameter.
template <class WL, class WR>
double rhs_on_sons(const ResidualData &r, const Segment &s, WL wl, WR wr)
{
  if (!r.f.has_analytic())
    return 0.0;
  const QuadratureRule &g = gauss_legendre(16);
  const double h = 0.5 * s.length();
  double sum = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q)
  {
    const double t = g.nodes[q];
    sum += g.weights[q] * h * wl(t) * r.f.value(trace_sample(s, 0.5 * t));
    sum += g.weights[q] * h * wr(t) * r.f.value(trace_sample(s, 0.5 + 0.5 * t));
  }
  return sum;
}

double hat_indicator(const ResidualData &r, std::size_t element)
{
  const Segment &s = r.mesh->element(element);
  const Sons so = sons(s);
  const double h = s.length();
  const double f = rhs_on_sons(r, s, [](double t) { return t; }, [](double t) { return 1.0 - t; });
  // <W D, v> = <V D', v'> with v' = +-2/h on the sons.
  const double wd = (2.0 / h) * haar_action(r, element, so);
  double num = f - wd;
  double den = (2.0 / h) * (2.0 / h) * haar_energy(so);
  if (r.equation == EquationTag::HypersingularStabilized)
  {
    num -= r.mean * 0.5 * h;
    den += 0.25 * h * h;
  }
  return std::abs(num) / std::sqrt(den);
}

}  // namespace

double two_level_hat_indicator(const ResidualData &r, std::size_t element, Point2 node)
{
  if (r.equation == EquationTag::WeaklySingular)
    throw InvalidArgument("two_level_hat_indicator: needs a hypersingular residual");
  const BoundaryMesh &mesh = *r.mesh;
  if (!mesh.closed() && (node == mesh.node(0) || node == mesh.node(mesh.node_count() - 1)))
    return 0.0;
  const Segment &s = mesh.element(element);
  if (distance(node, midpoint(s.geom.a, s.geom.b)) > 1e-14 * s.length())
    throw InvalidArgument("two_level_hat_indicator: node is not a new node of this element");
  return hat_indicator(r, element);
}

EstimatorReport two_level(const RightHandSide &f, const Density &u, EquationTag equation,
                          const EstimatorOptions &)
{
  const ResidualData r = make_residual(equation, f, u);
  const BoundaryMesh &mesh = *r.mesh;
  EstimatorReport report;
  report.kind = EstimatorKind::TwoLevel;
  report.equation = equation;
  report.level = mesh.level();
  report.local.resize(mesh.size());
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    if (equation != EquationTag::WeaklySingular)
    {
      report.local[e] = hat_indicator(r, e);
      continue;
    }
    const Segment &s = mesh.element(e);
    const Sons so = sons(s);
    const double num = rhs_on_sons(r, s, [](double) { return 1.0; }, [](double) { return -1.0; }) -
                       haar_action(r, e, so);
    report.local[e] = std::abs(num) / std::sqrt(haar_energy(so));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Weighted residual

std::vector<double> residual_l2_sq(const ResidualData &r, const EstimatorOptions &opts)
{
  const bool ws = weakly(r);
  if (ws && r.f.regularity < Regularity::HOne)
    throw InvalidArgument(std::string("weighted residual for the weakly-singular equation needs "
                                      "a right-hand side tagged H_one, got ") +
                          to_string(r.f.regularity));
  if (ws && r.f.has_analytic() && !r.f.derivative)
    throw InvalidArgument("weighted residual needs the tangential derivative of F");
  if (!ws && r.f.regularity < Regularity::L2)
    throw InvalidArgument("weighted residual for the hypersingular equation needs L2 data");

  const BoundaryMesh &mesh = *r.mesh;
  const QuadratureRule rule = graded_rule(opts.graded_levels, opts.gauss_order);
  const std::vector<double> cheb = chebyshev_lobatto(opts.far_degree);
  const std::vector<double> bw = barycentric_weights(cheb);
  // Interpolation matrix from the Chebyshev samples to the graded nodes.
  Eigen::MatrixXd interp(static_cast<Eigen::Index>(rule.size()), static_cast<Eigen::Index>(cheb.size()));
  {
    std::vector<double> unit(cheb.size(), 0.0);
    for (std::size_t c = 0; c < cheb.size(); ++c)
    {
      unit[c] = 1.0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        interp(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(c)) =
            barycentric_eval(cheb, bw, unit, rule.nodes[q]);
      unit[c] = 0.0;
    }
  }
  const double sigma = ws ? -1.0 : 1.0;
  const double shift = ws ? 0.0 : r.mean;

  std::vector<Point2> mids(mesh.size());
  for (std::size_t e = 0; e < mesh.size(); ++e)
    mids[e] = midpoint(mesh.element(e).geom.a, mesh.element(e).geom.b);

  std::vector<double> out(mesh.size());
  std::vector<std::size_t> near, far;
  Eigen::VectorXd far_values(static_cast<Eigen::Index>(cheb.size()));
  for (std::size_t t = 0; t < mesh.size(); ++t)
  {
    const Segment &seg = mesh.element(t);
    const double h = seg.length();
    const Point2 tau = seg.geom.tangent();
    near.clear();
    far.clear();
    for (std::size_t e = 0; e < mesh.size(); ++e)
    {
      if (r.psi[e] == 0.0)
        continue;
      const double reach = opts.near_factor * h;
      const double gap = distance(mids[e], mids[t]) - 0.5 * (h + mesh.element(e).length());
      if (e == t || (gap < reach && segment_distance(seg.geom, mesh.element(e).geom) < reach))
        near.push_back(e);
      else
        far.push_back(e);
    }
    for (std::size_t c = 0; c < cheb.size(); ++c)
    {
      const Point2 x = seg.geom.at(cheb[c]);
      double s = 0.0;
      for (std::size_t e : far)
        s += r.psi[e] * dot(log_integral_gradient(x, mesh.element(e).geom), tau);
      far_values[static_cast<Eigen::Index>(c)] = s;
    }
    const Eigen::VectorXd far_at_rule = interp * far_values;
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const TraceSample smp = trace_sample(seg, rule.nodes[q]);
      // On very small elements the outermost graded nodes round onto a mesh node.
      if (smp.x == seg.geom.a || smp.x == seg.geom.b)
        continue;
      double s = far_at_rule[static_cast<Eigen::Index>(q)];
      for (std::size_t e : near)
        s += r.psi[e] * dot(log_integral_gradient(smp.x, mesh.element(e).geom), tau);
      double a = 0.0;
      if (r.f.has_analytic())
        a = ws ? r.f.derivative(smp) : r.f.value(smp);
      const double g = a + sigma * kLaplaceFactor * s - shift;
      sum += rule.weights[q] * g * g;
    }
    out[t] = h * sum;
  }
  return out;
}

EstimatorReport weighted_from_l2(std::span<const double> l2_sq, std::span<const double> width,
                                 EstimatorKind kind, EquationTag equation, int level)
{
  if (l2_sq.size() != width.size())
    throw InvalidArgument("weighted_from_l2: size mismatch");
  EstimatorReport report;
  report.kind = kind;
  report.equation = equation;
  report.level = level;
  report.local.resize(l2_sq.size());
  for (std::size_t e = 0; e < l2_sq.size(); ++e)
    report.local[e] = std::sqrt(width[e] * l2_sq[e]);
  return report;
}

EstimatorReport weighted_residual(const RightHandSide &f, const Density &u, EquationTag equation,
                                  const EstimatorOptions &opts)
{
  const ResidualData r = make_residual(equation, f, u);
  const auto l2 = residual_l2_sq(r, opts);
  std::vector<double> h;
  for (const Segment &s : r.mesh->elements())
    h.push_back(s.length());
  return weighted_from_l2(l2, h, EstimatorKind::WeightedResidual, equation, r.mesh->level());
}

double inverse_estimate_ratio(EquationTag equation, const Density &v, const GalerkinMatrix &matrix,
                              const EstimatorOptions &opts)
{
  if (matrix.dimension() != v.space.dof_count())
    throw InvalidArgument("inverse_estimate_ratio: matrix does not match the density");
  static const RightHandSide zero = RightHandSide::constant(0.0);
  const ResidualData r = make_residual(equation, zero, v);
  const auto l2 = residual_l2_sq(r, opts);
  double num = 0.0;
  for (std::size_t e = 0; e < l2.size(); ++e)
    num += r.mesh->element(e).length() * l2[e];
  const double den = energy_norm_sq(matrix, v.coefficients);
  if (!(den > 0.0))
    throw InvalidArgument("inverse_estimate_ratio: density has zero energy");
  return std::sqrt(num / den);
}

EstimatorReport rho_modified(const RightHandSide &f, const Density &u, const MeshWidth &width,
                             EquationTag equation, const EstimatorOptions &opts)
{
  const ResidualData r = make_residual(equation, f, u);
  if (width.modified.size() != r.mesh->size())
    throw InvalidArgument("rho_modified: mesh width does not match the mesh");
  const auto l2 = residual_l2_sq(r, opts);
  return weighted_from_l2(l2, width.modified, EstimatorKind::RhoModified, equation,
                          r.mesh->level());
}

void write_estimator_report(std::ostream &os, const EstimatorReport &report)
{
  const auto old = os.precision(17);
  for (std::size_t e = 0; e < report.local.size(); ++e)
    os << report.level << ' ' << to_string(report.kind) << ' ' << e << ' ' << report.local[e]
       << '\n';
  os.precision(old);
}

}  // namespace abem
