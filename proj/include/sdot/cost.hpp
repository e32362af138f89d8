#pragma once

#include <span>
#include <string>
#include <vector>

#include "sdot/common.hpp"

namespace sdot {

// Both supported cost families have affine gradient differences
// grad_x c(x,y_i) - grad_x c(x,y_j) = -(y_i - y_j), identity c-exponential
// charts, and convex cell-membership sublevel sets.
enum class CostFamily {
  InnerProduct,       // c(x, y) = -<x, y>
  QuadraticDistance,  // c(x, y) = |x - y|^2 / 2
};

std::string to_string(CostFamily f);
CostFamily cost_family_from_string(const std::string& s);

struct CostModel {
  CostFamily family = CostFamily::InnerProduct;
  int dimension = 2;

  CostModel() = default;
  CostModel(CostFamily f, int dim) : family(f), dimension(dim) {
    if (dim < 1) throw std::invalid_argument("cost model: dimension must be >= 1");
  }
};

// The fixed finite target set {y_i}. Points are stored row-major.
class SiteSet {
 public:
  SiteSet() = default;
  SiteSet(int dim, std::vector<double> coords);
  static SiteSet from_points(const std::vector<Point>& pts);

  int size() const { return n_; }
  int dim() const { return dim_; }
  std::span<const double> site(int i) const { return {coords_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)}; }
  const std::vector<double>& coords() const { return coords_; }

  // Smallest pairwise distance; positive by construction.
  double min_pairwise_distance() const;

 private:
  int n_ = 0;
  int dim_ = 0;
  std::vector<double> coords_;
};

// Kantorovich dual variables, one per site. Canonical form has zero sum;
// vectors differing by a multiple of the ones vector define the same cells.
struct DualVector {
  std::vector<double> values;

  DualVector() = default;
  explicit DualVector(std::vector<double> v) : values(std::move(v)) {}
  explicit DualVector(int n) : values(static_cast<std::size_t>(n), 0.0) {}

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }

  double mean() const;
  DualVector canonical() const;
  void canonicalize();
};

// The computable constants of which every "universal" bound is a function.
// For the supported cost families the chart constants are identically 1.
struct UniversalConstants {
  double eps_tw = 0.0;   // min_{x,i!=j} |grad_x c(x,y_i) - grad_x c(x,y_j)|
  double c_grad = 0.0;   // max_{x,i} |grad_x c(x,y_i)|
  double c_exp = 1.0;
  double c_cond = 1.0;
  double c_det = 1.0;
  double bd_area = 0.0;  // H^{n-1}(boundary of the domain box)
  double rho_sup = 0.0;  // sup-norm of the density
};

double cost_value(const CostModel& model, const SiteSet& sites, std::span<const double> x, int i);

// grad_x c(x, y_i), written into `out` (size = dimension).
void cost_gradient(const CostModel& model, const SiteSet& sites, std::span<const double> x, int i, std::span<double> out);

struct EnvelopeValue {
  double value;
  int argmax;  // smallest index attaining the max
};

// psi^{c*}(x) = max_i (-c(x, y_i) - psi^i), ties broken by smallest index.
EnvelopeValue c_star_transform(const CostModel& model, const SiteSet& sites, const DualVector& psi, std::span<const double> x);

// (phi^{c+})^i = sup over the given support points of (-c(x, y_i) - phi(x)).
// `support_points` holds the point coordinates row-major, one row per value.
DualVector pseudo_c_transform(const CostModel& model, const SiteSet& sites, std::span<const double> support_points,
                              std::span<const double> phi_values);

// eps_tw and c_grad are exact: gradient differences are constant in x for both
// families, and the quadratic-family gradient norm is maximized at a box corner.
UniversalConstants universal_constants(const CostModel& model, const SiteSet& sites, const Box& domain, double rho_sup);

}  // namespace sdot
