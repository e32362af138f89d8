#include "sdot/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdot {

std::string to_string(CostFamily f) {
  return f == CostFamily::InnerProduct ? "inner_product" : "quadratic";
}

CostFamily cost_family_from_string(const std::string& s) {
  if (s == "inner_product") return CostFamily::InnerProduct;
  if (s == "quadratic") return CostFamily::QuadraticDistance;
  throw std::invalid_argument("unknown cost family: " + s);
}

SiteSet::SiteSet(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim < 1) throw std::invalid_argument("site set: dimension must be >= 1");
  if (coords_.empty() || coords_.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("site set: coordinate array size is not a multiple of the dimension");
  n_ = static_cast<int>(coords_.size() / static_cast<std::size_t>(dim));
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (dist_sq(site(i), site(j)) == 0.0)
        throw std::invalid_argument("site set: sites " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
}

SiteSet SiteSet::from_points(const std::vector<Point>& pts) {
  if (pts.empty()) throw std::invalid_argument("site set: empty point list");
  const int dim = static_cast<int>(pts.front().size());
  std::vector<double> flat;
  flat.reserve(pts.size() * static_cast<std::size_t>(dim));
  for (const auto& p : pts) {
    if (static_cast<int>(p.size()) != dim) throw std::invalid_argument("site set: inconsistent point dimensions");
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return SiteSet(dim, std::move(flat));
}

double SiteSet::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) best = std::min(best, dist_sq(site(i), site(j)));
  return std::sqrt(best);
}

double DualVector::mean() const {
  if (values.empty()) return 0.0;
  return neumaier_sum(values) / static_cast<double>(values.size());
}

DualVector DualVector::canonical() const {
  DualVector out = *this;
  out.canonicalize();
  return out;
}

void DualVector::canonicalize() {
  const double m = mean();
  for (double& v : values) v -= m;
}

double cost_value(const CostModel& model, const SiteSet& sites, std::span<const double> x, int i) {
  if (i < 0 || i >= sites.size()) throw std::out_of_range("cost_value: site index out of range");
  const auto y = sites.site(i);
  if (model.family == CostFamily::InnerProduct) return -dot(x, y);
  return 0.5 * dist_sq(x, y);
}

void cost_gradient(const CostModel& model, const SiteSet& sites, std::span<const double> x, int i, std::span<double> out) {
  if (i < 0 || i >= sites.size()) throw std::out_of_range("cost_gradient: site index out of range");
  const auto y = sites.site(i);
  for (int d = 0; d < model.dimension; ++d)
    out[d] = (model.family == CostFamily::InnerProduct) ? -y[d] : x[d] - y[d];
}

EnvelopeValue c_star_transform(const CostModel& model, const SiteSet& sites, const DualVector& psi, std::span<const double> x) {
  if (psi.size() != sites.size()) throw std::invalid_argument("c_star_transform: dual vector size mismatch");
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int i = 0; i < sites.size(); ++i) {
    const double v = -cost_value(model, sites, x, i) - psi[i];
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  return {best, arg};
}

DualVector pseudo_c_transform(const CostModel& model, const SiteSet& sites, std::span<const double> support_points,
                              std::span<const double> phi_values) {
  const int dim = model.dimension;
  const std::size_t npts = phi_values.size();
  if (npts == 0) throw std::invalid_argument("pseudo_c_transform: empty support mask");
  if (support_points.size() != npts * static_cast<std::size_t>(dim))
    throw std::invalid_argument("pseudo_c_transform: point/value count mismatch");
  DualVector out(sites.size());
  for (int i = 0; i < sites.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < npts; ++k) {
      std::span<const double> x{support_points.data() + k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
      best = std::max(best, -cost_value(model, sites, x, i) - phi_values[k]);
    }
    out[i] = best;
  }
  return out;
}

UniversalConstants universal_constants(const CostModel& model, const SiteSet& sites, const Box& domain, double rho_sup) {
  if (sites.size() < 2) throw std::invalid_argument("universal_constants: need at least two sites");
  if (domain.dim() != model.dimension || sites.dim() != model.dimension)
    throw std::invalid_argument("universal_constants: dimension mismatch");
  UniversalConstants uc;
  // Gradient differences equal y_j - y_i for both families, independent of x.
  uc.eps_tw = sites.min_pairwise_distance();
  double cg = 0.0;
  for (int i = 0; i < sites.size(); ++i) {
    const auto y = sites.site(i);
    if (model.family == CostFamily::InnerProduct) {
      cg = std::max(cg, norm2(y));
    } else {
      // max_x |x - y_i| over the box is attained coordinatewise at the far wall
      double s = 0.0;
      for (int d = 0; d < domain.dim(); ++d) {
        const double far = std::max(std::abs(domain.lower[d] - y[d]), std::abs(domain.upper[d] - y[d]));
        s += far * far;
      }
      cg = std::max(cg, std::sqrt(s));
    }
  }
  uc.c_grad = cg;
  uc.bd_area = domain.boundary_area();
  uc.rho_sup = rho_sup;
  if (!(uc.eps_tw > 0.0)) throw std::invalid_argument("universal_constants: twist constant vanished (coincident sites?)");
  return uc;
}

}  // namespace sdot
