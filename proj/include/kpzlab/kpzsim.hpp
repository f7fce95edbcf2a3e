#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kpzlab/lpp.hpp"

namespace kpzlab {

// Initial condition h0 with the decay envelope h0(y) <= alpha - gamma_ y^2,
// support in [-lambda_, infinity), and a witness radius theta with
// sup_{|y|<=theta} h0(y) >= -theta.
struct InitialData {
  enum class Kind { narrow_wedge, double_wedge, tabulated };
  Kind kind = Kind::narrow_wedge;
  double u = 0.0;
  double u2 = 0.0;
  std::vector<double> grid;    // tabulated only
  std::vector<double> values;  // -infinity allowed
  double alpha = 0.0;
  double gamma_ = 1.0;
  double lambda_ = 0.0;
  double theta = 1.0;
};

InitialData narrow_wedge(double u);
InitialData double_wedge(double u1, double u2);
InitialData tabulated(std::vector<double> grid, std::vector<double> values,
                      double alpha, double gamma, double lambda, double theta);

// Throws invalid_argument when the envelope, support, witness, or shape
// invariants fail.
void validate_initial_data(const InitialData& h0);

struct SpatialProfile {
  std::vector<double> x_grid;  // snapped abscissas
  std::vector<double> h;       // -infinity allowed
  double t = 1.0;
  // The profile is computed after shifting h0 by lambda_ horizontally and
  // alpha + gamma_ lambda_^2 vertically. Original-frame values are
  // h(x - x_translation) + level_shift.
  double x_translation = 0.0;
  double level_shift = 0.0;
};

struct SheetSlice {
  Eigen::MatrixXd s;  // rows = y_list, cols = x_list
  bool snapped = false;  // some endpoint was pulled back onto the grid
};

// S_n(y, x) from the environment's top `n` lines; endpoints snap to the grid
// before centering so the same point always produces the same value.
SheetSlice airy_sheet_slice(const Environment& env,
                            const std::vector<double>& y_list,
                            const std::vector<double>& x_list);

SpatialProfile h_profile(const Environment& env, const InitialData& h0,
                         const std::vector<double>& x_grid);

struct SpacetimeField {
  std::vector<double> t_grid;
  std::vector<double> x_grid;  // as requested; slices snap internally
  Eigen::MatrixXd h;           // rows = t, cols = x
  double x_translation = 0.0;
  double level_shift = 0.0;
};

// Slice at t uses only the top floor(t n) lines of the same environment,
// rescaled with n_t = floor(t n), giving a coupled temporal evolution.
SpacetimeField h_spacetime(const Environment& env, const InitialData& h0,
                           const std::vector<double>& t_grid,
                           const std::vector<double>& x_grid);

struct TPPair {
  double x1;
  double x2;
  double deficit1;
  double deficit2;
};

struct TPReport {
  double max_value;
  double argmax;  // largest maximizer
  std::vector<TPPair> pairs;
  bool in_tp_set;
};

// Near-maximizer search on [-beta L, beta L]: pairs separated by at least A
// with both deficits <= eps; membership also demands |max| <= beta sqrt(L).
TPReport find_near_maximizers(const SpatialProfile& profile, double eps,
                              double A, double L, double beta);

}  // namespace kpzlab
