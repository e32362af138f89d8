#include "sdot/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sdot/distance_transform.hpp"
#include "sdot/parallel.hpp"

namespace sdot {

SymmetricDifference symmetric_difference(const CellPartition& p1, const CellPartition& p2, const GriddedMeasure& mu) {
  if (!(p1.grid == p2.grid) || !(p1.grid == mu.grid())) throw std::invalid_argument("symmetric_difference: grid mismatch");
  if (p1.n_sites != p2.n_sites) throw std::invalid_argument("symmetric_difference: site count mismatch");
  SymmetricDifference out;
  out.per_cell.assign(static_cast<std::size_t>(p1.n_sites), 0.0);
  const double pixvol = mu.pixel_volume();
  const std::int64_t npix = p1.grid.num_pixels();
  for (std::int64_t p = 0; p < npix; ++p) {
    const int a = p1.labels[static_cast<std::size_t>(p)];
    const int b = p2.labels[static_cast<std::size_t>(p)];
    if (a == b) continue;
    const double m = mu.density_at(p) * pixvol;
    out.per_cell[static_cast<std::size_t>(a)] += m;
    out.per_cell[static_cast<std::size_t>(b)] += m;
  }
  out.total = neumaier_sum(out.per_cell);
  return out;
}

namespace {

// max over pixels with label `i` in `from` of the EDT-to-{label i in `to`}.
double directed_hausdorff(const CellPartition& from, const CellPartition& to, int i, int n_threads) {
  const Grid& grid = from.grid;
  const std::int64_t npix = grid.num_pixels();
  std::vector<std::uint8_t> target(static_cast<std::size_t>(npix));
  for (std::int64_t p = 0; p < npix; ++p) target[static_cast<std::size_t>(p)] = to.labels[static_cast<std::size_t>(p)] == i;
  const auto edt = squared_edt(grid, target, n_threads);
  double worst = 0.0;
  for (std::int64_t p = 0; p < npix; ++p)
    if (from.labels[static_cast<std::size_t>(p)] == i) worst = std::max(worst, edt[static_cast<std::size_t>(p)]);
  return std::sqrt(worst);
}

}  // namespace

double hausdorff_distance(const CellPartition& p1, const CellPartition& p2, int i, int n_threads) {
  if (!(p1.grid == p2.grid)) throw std::invalid_argument("hausdorff_distance: grid mismatch");
  if (p1.effectively_empty(i) || p2.effectively_empty(i))
    throw std::invalid_argument("hausdorff_distance: cell " + std::to_string(i) + " is below the mass threshold");
  return std::max(directed_hausdorff(p1, p2, i, n_threads), directed_hausdorff(p2, p1, i, n_threads));
}

std::vector<double> sphere_directions(int dim, int M) {
  if (M < 1) throw std::invalid_argument("sphere_directions: need at least one direction");
  std::vector<double> out;
  if (dim == 1) {
    out = {1.0, -1.0};
  } else if (dim == 2) {
    out.reserve(static_cast<std::size_t>(M) * 2);
    for (int k = 0; k < M; ++k) {
      const double a = 2.0 * std::numbers::pi * k / M;
      out.push_back(std::cos(a));
      out.push_back(std::sin(a));
    }
  } else if (dim == 3) {
    out.reserve(static_cast<std::size_t>(M) * 3);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < M; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / M;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      out.push_back(r * std::cos(golden * k));
      out.push_back(r * std::sin(golden * k));
      out.push_back(z);
    }
  } else {
    throw std::invalid_argument("sphere_directions: unsupported dimension");
  }
  return out;
}

namespace {

struct Halfspace {
  std::vector<double> a;
  double b;
};

std::vector<Halfspace> cell_halfspaces(const SiteSet& sites, const Box& box, const DualVector& psi, int i) {
  const int n = box.dim();
  std::vector<Halfspace> hs;
  for (int d = 0; d < n; ++d) {
    std::vector<double> up(static_cast<std::size_t>(n), 0.0), dn(static_cast<std::size_t>(n), 0.0);
    up[static_cast<std::size_t>(d)] = 1.0;
    dn[static_cast<std::size_t>(d)] = -1.0;
    hs.push_back({up, box.upper[static_cast<std::size_t>(d)]});
    hs.push_back({dn, -box.lower[static_cast<std::size_t>(d)]});
  }
  const auto yi = sites.site(i);
  for (int j = 0; j < sites.size(); ++j) {
    if (j == i) continue;
    const auto yj = sites.site(j);
    std::vector<double> a(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) a[static_cast<std::size_t>(d)] = yj[static_cast<std::size_t>(d)] - yi[static_cast<std::size_t>(d)];
    hs.push_back({std::move(a), psi[j] - psi[i]});
  }
  return hs;
}

bool feasible_point(const std::vector<Halfspace>& hs, std::span<const double> x) {
  for (const auto& h : hs) {
    const double lhs = dot(h.a, x);
    const double scale = 1.0 + std::abs(h.b) + norm2(h.a) * norm2(x);
    if (lhs > h.b + 1e-9 * scale) return false;
  }
  return true;
}

}  // namespace

std::vector<double> laguerre_cell_vertices(const CostModel& model, const SiteSet& sites, const Box& box, const DualVector& psi_in,
                                           int i) {
  if (model.family != CostFamily::InnerProduct)
    throw std::invalid_argument("laguerre_cell_vertices: exact polytope cells require the inner-product cost");
  const int n = box.dim();
  if (n > 3) throw std::invalid_argument("laguerre_cell_vertices: supported for dimension <= 3");
  const DualVector psi = psi_in.canonical();
  const auto hs = cell_halfspaces(sites, box, psi, i);
  const int m = static_cast<int>(hs.size());
  std::vector<double> verts;

  if (n == 1) {
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (const auto& h : hs) {
      const double a = h.a[0];
      if (a > 0.0)
        hi = std::min(hi, h.b / a);
      else if (a < 0.0)
        lo = std::max(lo, h.b / a);
      else if (h.b < 0.0)
        return {};
    }
    if (lo > hi) return {};
    return {lo, hi};
  }

  std::vector<double> x(static_cast<std::size_t>(n));
  if (n == 2) {
    for (int p = 0; p < m; ++p)
      for (int r = p + 1; r < m; ++r) {
        const auto &h1 = hs[static_cast<std::size_t>(p)], &h2 = hs[static_cast<std::size_t>(r)];
        const double det = h1.a[0] * h2.a[1] - h1.a[1] * h2.a[0];
        if (std::abs(det) <= 1e-14 * (norm2(h1.a) * norm2(h2.a))) continue;
        x[0] = (h1.b * h2.a[1] - h2.b * h1.a[1]) / det;
        x[1] = (h1.a[0] * h2.b - h2.a[0] * h1.b) / det;
        if (feasible_point(hs, x)) verts.insert(verts.end(), x.begin(), x.end());
      }
    return verts;
  }

  // n == 3: Cramer over all constraint triples
  for (int p = 0; p < m; ++p)
    for (int r = p + 1; r < m; ++r)
      for (int s = r + 1; s < m; ++s) {
        const auto &h1 = hs[static_cast<std::size_t>(p)], &h2 = hs[static_cast<std::size_t>(r)], &h3 = hs[static_cast<std::size_t>(s)];
        const double det = h1.a[0] * (h2.a[1] * h3.a[2] - h2.a[2] * h3.a[1]) - h1.a[1] * (h2.a[0] * h3.a[2] - h2.a[2] * h3.a[0]) +
                           h1.a[2] * (h2.a[0] * h3.a[1] - h2.a[1] * h3.a[0]);
        if (std::abs(det) <= 1e-14 * (norm2(h1.a) * norm2(h2.a) * norm2(h3.a))) continue;
        for (int col = 0; col < 3; ++col) {
          double c1[3] = {h1.a[0], h1.a[1], h1.a[2]};
          double c2[3] = {h2.a[0], h2.a[1], h2.a[2]};
          double c3[3] = {h3.a[0], h3.a[1], h3.a[2]};
          c1[col] = h1.b;
          c2[col] = h2.b;
          c3[col] = h3.b;
          const double num = c1[0] * (c2[1] * c3[2] - c2[2] * c3[1]) - c1[1] * (c2[0] * c3[2] - c2[2] * c3[0]) +
                             c1[2] * (c2[0] * c3[1] - c2[1] * c3[0]);
          x[static_cast<std::size_t>(col)] = num / det;
        }
        if (feasible_point(hs, x)) verts.insert(verts.end(), x.begin(), x.end());
      }
  return verts;
}

double support_function(std::span<const double> vertices, int dim, std::span<const double> direction) {
  if (vertices.empty()) throw std::invalid_argument("support_function: empty vertex set");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + dim <= vertices.size(); k += static_cast<std::size_t>(dim))
    best = std::max(best, dot(vertices.subspan(k, static_cast<std::size_t>(dim)), direction));
  return best;
}

double hausdorff_support_function(const CostModel& model, const SiteSet& sites, const Box& box, const DualVector& psi1,
                                  const DualVector& psi2, int i, int directions) {
  const int n = box.dim();
  const auto v1 = laguerre_cell_vertices(model, sites, box, psi1, i);
  const auto v2 = laguerre_cell_vertices(model, sites, box, psi2, i);
  if (v1.empty() || v2.empty()) throw std::invalid_argument("hausdorff_support_function: empty cell");
  const auto dirs = sphere_directions(n, directions);
  double worst = 0.0;
  for (std::size_t k = 0; k + n <= dirs.size(); k += static_cast<std::size_t>(n)) {
    const auto v = std::span<const double>(dirs).subspan(k, static_cast<std::size_t>(n));
    worst = std::max(worst, std::abs(support_function(v1, n, v) - support_function(v2, n, v)));
  }
  return worst;
}

double uniform_potential_distance(const CostModel& model, const SiteSet& sites, const Grid& grid, const DualVector& psi1,
                                  const DualVector& psi2, int n_threads) {
  // the common quadratic term cancels in the difference, so affine envelopes
  // suffice for both families
  const int N = sites.size();
  if (psi1.size() != N || psi2.size() != N) throw std::invalid_argument("uniform_potential_distance: size mismatch");
  std::vector<double> b1(static_cast<std::size_t>(N)), b2(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    double base = 0.0;
    if (model.family == CostFamily::QuadraticDistance) base = -0.5 * norm2_sq(sites.site(i));
    b1[static_cast<std::size_t>(i)] = base - psi1[i];
    b2[static_cast<std::size_t>(i)] = base - psi2[i];
  }
  const std::int64_t line_len = grid.res[static_cast<std::size_t>(grid.dim() - 1)];
  const std::int64_t n_lines = grid.num_pixels() / line_len;
  std::vector<double> line_max(static_cast<std::size_t>(n_lines), 0.0);
  run_chunks(n_lines, n_threads, [&](std::int64_t line) {
    std::vector<double> x(static_cast<std::size_t>(grid.dim()));
    grid.center(line * line_len, x);
    const int last = grid.dim() - 1;
    const double h = grid.width(last);
    std::vector<double> s1(static_cast<std::size_t>(N)), s2(static_cast<std::size_t>(N)), step(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      const auto y = sites.site(i);
      const double d = dot(x, y);
      s1[static_cast<std::size_t>(i)] = d + b1[static_cast<std::size_t>(i)];
      s2[static_cast<std::size_t>(i)] = d + b2[static_cast<std::size_t>(i)];
      step[static_cast<std::size_t>(i)] = h * y[static_cast<std::size_t>(last)];
    }
    double worst = 0.0;
    for (std::int64_t k = 0; k < line_len; ++k) {
      double m1 = s1[0], m2 = s2[0];
      for (int i = 1; i < N; ++i) {
        m1 = std::max(m1, s1[static_cast<std::size_t>(i)]);
        m2 = std::max(m2, s2[static_cast<std::size_t>(i)]);
      }
      worst = std::max(worst, std::abs(m1 - m2));
      for (int i = 0; i < N; ++i) {
        s1[static_cast<std::size_t>(i)] += step[static_cast<std::size_t>(i)];
        s2[static_cast<std::size_t>(i)] += step[static_cast<std::size_t>(i)];
      }
    }
    line_max[static_cast<std::size_t>(line)] = worst;
  });
  double out = 0.0;
  for (double v : line_max) out = std::max(out, v);
  return out;
}

const BoundClause* StabilityReport::find(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

double ratio_of(double measured, double bound) {
  if (bound > 0.0) return measured / bound;
  return measured == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

BoundClause make_clause(std::string name, bool applicable, double measured, double bound, double hyp_residual = 0.0) {
  BoundClause c;
  c.name = std::move(name);
  c.applicable = applicable;
  c.measured = measured;
  c.bound = bound;
  c.ratio = applicable ? ratio_of(measured, bound) : 0.0;
  c.hypothesis_residual = hyp_residual;
  return c;
}

double min_positive_floor(std::span<const double> v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::min(m, x);
  return std::max(m, 0.0);
}

// volume of pixels with label i in `a` but not in `b`
double label_diff_volume(const CellPartition& a, const CellPartition& b, int i) {
  double n = 0.0;
  for (std::size_t p = 0; p < a.labels.size(); ++p)
    if (a.labels[p] == i && b.labels[p] != i) n += 1.0;
  return n * a.grid.pixel_volume();
}

struct IntersectionGeometry {
  double volume = 0.0;
  double diam = 0.0;
  double sup_dist_1 = 0.0;  // sup over cell-of-p1 pixels of distance to the intersection
  double sup_dist_2 = 0.0;
};

IntersectionGeometry intersection_geometry(const CellPartition& p1, const CellPartition& p2, int i, int n_threads) {
  const Grid& grid = p1.grid;
  const std::int64_t npix = grid.num_pixels();
  std::vector<std::uint8_t> inter(static_cast<std::size_t>(npix));
  std::int64_t count = 0;
  for (std::int64_t p = 0; p < npix; ++p) {
    const bool in = p1.labels[static_cast<std::size_t>(p)] == i && p2.labels[static_cast<std::size_t>(p)] == i;
    inter[static_cast<std::size_t>(p)] = in;
    count += in;
  }
  IntersectionGeometry geo;
  geo.volume = static_cast<double>(count) * grid.pixel_volume();
  if (count == 0) return geo;

  // diameter of the intersection's pixel centers
  {
    CellPartition tmp;
    tmp.grid = grid;
    tmp.n_sites = 1;
    tmp.labels.assign(static_cast<std::size_t>(npix), 1);
    for (std::int64_t p = 0; p < npix; ++p)
      if (inter[static_cast<std::size_t>(p)]) tmp.labels[static_cast<std::size_t>(p)] = 0;
    geo.diam = diameter(tmp, 0);
  }

  const auto edt = squared_edt(grid, inter, n_threads);
  double s1 = 0.0, s2 = 0.0;
  for (std::int64_t p = 0; p < npix; ++p) {
    if (p1.labels[static_cast<std::size_t>(p)] == i) s1 = std::max(s1, edt[static_cast<std::size_t>(p)]);
    if (p2.labels[static_cast<std::size_t>(p)] == i) s2 = std::max(s2, edt[static_cast<std::size_t>(p)]);
  }
  geo.sup_dist_1 = std::sqrt(s1);
  geo.sup_dist_2 = std::sqrt(s2);
  return geo;
}

}  // namespace

StabilityReport evaluate_bounds(const CostModel& model, const SiteSet& sites, const GriddedMeasure& mu, const DualVector& psi1_in,
                                const DualVector& psi2_in, const CellPartition& p1, const CellPartition& p2,
                                const UniversalConstants& uc, double q, double c_pw, const BoundsOptions& opts) {
  const int N = sites.size();
  const int n = model.dimension;
  const Grid& grid = mu.grid();
  const DualVector psi1 = psi1_in.canonical();
  const DualVector psi2 = psi2_in.canonical();

  if (!(p1.grid == grid) || !(p2.grid == grid)) throw std::invalid_argument("evaluate_bounds: grid mismatch");

  StabilityReport rep;
  rep.n_sites = N;
  rep.dim = n;
  rep.q = q;
  rep.c_pw = c_pw;

  const auto sym = symmetric_difference(p1, p2, mu);
  rep.per_cell_delta_mu = sym.per_cell;
  rep.total_delta_mu = sym.total;

  std::vector<double> dpsi(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) dpsi[static_cast<std::size_t>(i)] = psi1[i] - psi2[i];
  rep.psi_l2 = norm2(dpsi);
  rep.psi_linf = norm_linf(dpsi);

  std::vector<double> dlam(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) dlam[static_cast<std::size_t>(i)] = p1.masses[static_cast<std::size_t>(i)] - p2.masses[static_cast<std::size_t>(i)];
  rep.lambda_l1 = norm_l1(dlam);
  rep.lambda_l2 = norm2(dlam);

  rep.potential_c0 = uniform_potential_distance(model, sites, grid, psi1, psi2, opts.n_threads);

  // per-cell Hausdorff distances (grid and/or exact support route)
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.per_cell_hausdorff.assign(static_cast<std::size_t>(N), nan);
  for (int i = 0; i < N; ++i) {
    const bool nonempty = !p1.effectively_empty(i) && !p2.effectively_empty(i);
    double used = nan;
    if (opts.grid_hausdorff && nonempty) used = hausdorff_distance(p1, p2, i, opts.n_threads);
    if (opts.support_hausdorff && model.family == CostFamily::InnerProduct && nonempty) {
      const double hs = hausdorff_support_function(model, sites, grid.box, psi1, psi2, i, opts.support_directions);
      used = std::isnan(used) ? hs : std::max(used, hs);
    }
    rep.per_cell_hausdorff[static_cast<std::size_t>(i)] = used;
  }
  bool all_dh = true;
  double dh_max = 0.0, dh_sq = 0.0;
  for (double v : rep.per_cell_hausdorff) {
    if (std::isnan(v)) {
      all_dh = false;
      continue;
    }
    dh_max = std::max(dh_max, v);
    dh_sq += v * v;
  }
  rep.hausdorff_max = dh_max;
  rep.hausdorff_l2 = std::sqrt(dh_sq);

  const double omega_n = unit_ball_volume(n);
  const double c_delta = 2.0 * std::pow(uc.c_exp, n - 1) * uc.bd_area / uc.eps_tw;
  const double pixdiam = grid.pixel_diameter();
  const double diam_x = grid.box.diameter();

  // Thm 1.2
  rep.clauses.push_back(make_clause("thm_symmetric_difference", true, rep.total_delta_mu, 4.0 * N * rep.lambda_l1));

  const double min1 = min_positive_floor(p1.masses);
  const double min2 = min_positive_floor(p2.masses);
  const double max_min_mass = std::max(min1, min2);

  // Thm 1.7 quantitative invertibility
  {
    const bool applicable = q > 1.0 && max_min_mass > 0.0;
    double bound = 0.0;
    if (applicable)
      bound = q * std::pow(static_cast<double>(N), 4) * uc.c_grad * c_pw * rep.lambda_l2 /
              (4.0 * (q - 1.0) * std::pow(max_min_mass, 1.0 / q));
    rep.clauses.push_back(make_clause("thm_quantitative_invertibility", applicable, rep.psi_l2, bound));
  }

  // Thm HausPsiBound: d_H^n against the dual-variable difference, per cell
  {
    const double c2 = std::pow(2.0, 2 * n - 3) / (omega_n * omega_n * std::pow(n + 2.0, 2 * n) * std::pow(diam_x, 2 * n));
    double worst_meas = 0.0, worst_bound = 0.0, worst_ratio = -1.0;
    bool any = false;
    double hyp_res = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      const double dh = rep.per_cell_hausdorff[static_cast<std::size_t>(i)];
      if (std::isnan(dh)) continue;
      const double lmax = std::max(p1.lebesgue[static_cast<std::size_t>(i)], p2.lebesgue[static_cast<std::size_t>(i)]);
      const double hyp = lmax / (2.0 * c_delta * N) - rep.psi_linf;  // > 0 when the hypothesis holds
      hyp_res = std::min(hyp_res, -hyp);
      if (hyp <= 0.0) continue;
      const double acos_arg = std::clamp(1.0 - c2 * lmax * lmax, -1.0, 1.0);
      const double denom = std::pow(std::acos(acos_arg), n - 1);
      if (!(denom > 0.0)) continue;
      const double bound = std::pow(2.0 * std::numbers::pi, n - 1) * c_delta * N * rep.psi_linf / (omega_n * denom);
      const double meas = std::pow(dh, n);
      any = true;
      if (ratio_of(meas, bound) > worst_ratio) {
        worst_ratio = ratio_of(meas, bound);
        worst_meas = meas;
        worst_bound = bound;
      }
    }
    rep.clauses.push_back(make_clause("thm_hausdorff_vs_dual", any, worst_meas, worst_bound,
                                      any ? 0.0 : (std::isfinite(hyp_res) ? hyp_res : 0.0)));
  }

  // Cor 1.8(2): constraint plus the mass-difference form of the bound
  {
    const bool q_ok = q > 1.0 && max_min_mass > 0.0;
    const double c1 = q_ok ? q * c_delta * uc.c_grad * c_pw * uc.rho_sup / (2.0 * (q - 1.0)) : 0.0;
    const double c2 = std::pow(2.0, 2 * n - 3) / (omega_n * omega_n * std::pow(n + 2.0, 2 * n) * std::pow(diam_x, 2 * n));
    double worst_meas = 0.0, worst_bound = 0.0, worst_ratio = -1.0;
    bool any = false;
    double hyp_res = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      const double dh = rep.per_cell_hausdorff[static_cast<std::size_t>(i)];
      if (std::isnan(dh) || !q_ok) continue;
      const double lam_max_i = std::max(p1.masses[static_cast<std::size_t>(i)], p2.masses[static_cast<std::size_t>(i)]);
      const double constraint_rhs = lam_max_i * std::pow(max_min_mass, 1.0 / q);
      const double constraint_lhs = c1 * std::pow(static_cast<double>(N), 5) * rep.lambda_l2;
      hyp_res = std::min(hyp_res, constraint_lhs - constraint_rhs);
      if (!(constraint_lhs < constraint_rhs)) continue;
      const double acos_arg = std::clamp(1.0 - c2 * lam_max_i * lam_max_i / (uc.rho_sup * uc.rho_sup), -1.0, 1.0);
      const double denom = std::pow(std::acos(acos_arg), n - 1);
      if (!(denom > 0.0)) continue;
      const double hp_c1 = std::pow(2.0 * std::numbers::pi, n - 1) * c_delta / omega_n;
      const double bound = q * hp_c1 * std::pow(static_cast<double>(N), 5) * uc.c_grad * c_pw * rep.lambda_l2 /
                           (4.0 * (q - 1.0) * std::pow(max_min_mass, 1.0 / q) * denom);
      const double meas = std::pow(dh, n);
      any = true;
      if (ratio_of(meas, bound) > worst_ratio) {
        worst_ratio = ratio_of(meas, bound);
        worst_meas = meas;
        worst_bound = bound;
      }
    }
    rep.constraint_satisfied = any;
    rep.clauses.push_back(
        make_clause("cor_hausdorff_vs_mass", any, worst_meas, worst_bound, any ? 0.0 : (std::isfinite(hyp_res) ? hyp_res : 0.0)));
  }

  // Thm 1.9 uniform potentials vs Hausdorff
  {
    const bool applicable = n >= 2 && all_dh;
    double bound = 0.0;
    if (applicable) {
      const double max_min_leb = std::max(min_positive_floor(p1.lebesgue), min_positive_floor(p2.lebesgue));
      if (max_min_leb > 0.0) {
        const double c = n * uc.bd_area * uc.c_grad * c_pw / (2.0 * std::pow(grid.box.volume(), 1.0 / n));
        bound = c * std::pow(static_cast<double>(N), 4) * rep.hausdorff_l2 / std::pow(max_min_leb, 1.0 - 1.0 / n);
      }
    }
    rep.clauses.push_back(make_clause("thm_uniform_potentials", applicable && bound > 0.0, rep.potential_c0, bound));
  }

  // c*-transform contraction (definitional, unconditional)
  rep.clauses.push_back(make_clause("cstar_contraction", true, rep.potential_c0, rep.psi_linf));

  if (opts.cell_geometry) {
    // Lemma celldiffbound: L(Lag_i(psi1) \ Lag_i(psi2)) <= C_Delta N |dpsi|_inf
    {
      double worst = 0.0;
      for (int i = 0; i < N; ++i) {
        worst = std::max(worst, label_diff_volume(p1, p2, i));
        worst = std::max(worst, label_diff_volume(p2, p1, i));
      }
      rep.clauses.push_back(make_clause("lem_cell_difference", true, worst, c_delta * N * rep.psi_linf + 2.0 * pixdiam * uc.bd_area));
    }

    // Lemma 6.1: L(A symdiff B) <= 2 d_H H^{n-1}(dX), plus pixel slack
    {
      double worst_meas = 0.0, worst_bound = 0.0, worst_ratio = -1.0;
      bool any = false;
      for (int i = 0; i < N; ++i) {
        const double dh = rep.per_cell_hausdorff[static_cast<std::size_t>(i)];
        if (std::isnan(dh)) continue;
        const double vol = label_diff_volume(p1, p2, i) + label_diff_volume(p2, p1, i);
        const double bound = 2.0 * dh * uc.bd_area + 2.0 * pixdiam * uc.bd_area;
        any = true;
        if (ratio_of(vol, bound) > worst_ratio) {
          worst_ratio = ratio_of(vol, bound);
          worst_meas = vol;
          worst_bound = bound;
        }
      }
      rep.clauses.push_back(make_clause("lem_symmetric_difference_hausdorff", any, worst_meas, worst_bound));
    }

    // Lemma contains-ball on every nonempty cell of both partitions
    {
      double worst_meas = 0.0, worst_bound = 0.0, worst_ratio = -1.0;
      bool any = false;
      for (const CellPartition* part : {&p1, &p2}) {
        for (int i = 0; i < N; ++i) {
          if (part->effectively_empty(i)) continue;
          const double vol = part->lebesgue[static_cast<std::size_t>(i)];
          const double dia = diameter(*part, i);
          if (!(dia > 0.0)) continue;
          const double c_a = std::pow(2.0, n - 1) / (omega_n * std::pow(n + 2.0, n) * std::pow(dia, n - 1));
          const double meas = c_a * vol;
          const double bound = inradius(*part, i, opts.n_threads) + 2.0 * pixdiam;
          any = true;
          if (ratio_of(meas, bound) > worst_ratio) {
            worst_ratio = ratio_of(meas, bound);
            worst_meas = meas;
            worst_bound = bound;
          }
        }
      }
      rep.clauses.push_back(make_clause("lem_contains_ball", any, worst_meas, worst_bound));
    }

    // Prop setdiffbound on the nested pair (intersection, cell)
    {
      double worst_meas = 0.0, worst_bound = 0.0, worst_ratio = -1.0;
      bool any = false;
      for (int i = 0; i < N; ++i) {
        if (p1.effectively_empty(i) || p2.effectively_empty(i)) continue;
        const auto geo = intersection_geometry(p1, p2, i, opts.n_threads);
        for (int side = 0; side < 2; ++side) {
          const CellPartition& outer = side == 0 ? p1 : p2;
          const CellPartition& other = side == 0 ? p2 : p1;
          const double sup_d = side == 0 ? geo.sup_dist_1 : geo.sup_dist_2;
          const double setdiff = label_diff_volume(outer, other, i);  // L(B \ A)
          double rhs = 0.0;
          if (geo.volume > 0.0 && geo.diam > 0.0) {
            const double outer_diam = diameter(outer, i);
            const double c_a = std::pow(2.0, n - 1) / (omega_n * std::pow(n + 2.0, n) * std::pow(geo.diam, n - 1));
            const double arg = std::clamp(1.0 - 2.0 * c_a * c_a * geo.volume * geo.volume / (outer_diam * outer_diam), -1.0, 1.0);
            const double d_used = std::max(0.0, sup_d - 2.0 * pixdiam);
            rhs = omega_n * std::pow(d_used, n) / std::pow(2.0 * std::numbers::pi, n - 1) * std::pow(std::acos(arg), n - 1);
          }
          any = true;
          if (ratio_of(rhs, setdiff) > worst_ratio && rhs > 0.0) {
            worst_ratio = ratio_of(rhs, setdiff);
            worst_meas = rhs;
            worst_bound = setdiff;
          }
        }
      }
      rep.clauses.push_back(make_clause("prop_set_difference", any, worst_meas, worst_bound));
    }
  }

  return rep;
}

}  // namespace sdot
