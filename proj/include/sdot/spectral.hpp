#pragma once

#include "sdot/dg.hpp"

namespace sdot {

// Eigenvalues of -DG in ascending order (dense symmetric solve). Throws if
// the matrix is asymmetric beyond tolerance.
std::vector<double> laplacian_spectrum(const DGMatrix& dg);

struct ThresholdGraph {
  double tau = 0.0;       // weight threshold
  bool connected = false;
  int diameter = -1;      // unweighted hop diameter; -1 when disconnected
  std::vector<std::pair<int, int>> edges;  // kept edges (i < j)
};

// Unit-weight graph keeping edges with w_ij >= tau, where
// tau = 2^{1-1/q} eps^{1/q} / (C_grad N^2 C_PW).
ThresholdGraph threshold_connectivity(const DGMatrix& dg, double eps, double q, double c_pw, const UniversalConstants& uc);

struct SpectralReport {
  std::vector<double> eigenvalues;  // of -DG, ascending
  double fiedler_value = 0.0;       // second-smallest eigenvalue
  double eps = 0.0;
  double q = 0.0;
  double c_pw = 0.0;
  double tau = 0.0;
  bool threshold_connected = false;
  int threshold_diameter = -1;
  // spectral floor 2^{3-1/q} eps^{1/q} / (C_grad N^4 C_PW), conditional on
  // the supplied C_PW being an upper bound for the true constant
  double bound_value = 0.0;
  bool bound_holds = false;
  // unconditional intermediate: lambda_2 of the thresholded unit-weight
  // Laplacian against 4 / (N diam)
  double thresholded_fiedler = 0.0;
  double mohar_bound = 0.0;
  bool mohar_holds = false;
};

SpectralReport better_bound_check(const DGMatrix& dg, double eps, double q, double c_pw, const UniversalConstants& uc);

}  // namespace sdot
