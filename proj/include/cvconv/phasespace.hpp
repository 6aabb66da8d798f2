// Copyright 2026 The cvconv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cvconv/fock.hpp"

namespace cvconv {

/// Square grid [-E, E]^2 with an odd number of nodes per axis, so the origin is a node.
struct PhaseGrid {
    double half_extent = 6.0;
    int points = 257;

    static PhaseGrid make(double half_extent, int points);

    double spacing() const { return 2.0 * half_extent / (points - 1); }
    double coord(int i) const { return -half_extent + i * spacing(); }
};

/// max(6, 3 sqrt(2<n>+1) + sqrt2 |alpha|), 257 points.
PhaseGrid default_grid(const FockVector &psi, double alpha_scale = 0.0);

/// chi(r) = Tr[D(-r) rho] sampled at values(i, j) = chi(x_i, y_j).
struct CharFn {
    PhaseGrid grid;
    Eigen::MatrixXcd values;
};

/// W(q_i, p_j) in values(i, j).
struct WignerFn {
    PhaseGrid grid;
    Eigen::MatrixXd values;
    bool aliased = false;
    double imag_residue = 0.0;
};

/// Angular-harmonic expansion of chi or W around the origin,
///   chi(rho, theta) = sum_k R_k(rho) e^{i k theta},
/// with R_k tabulated on a uniform radial grid and interpolated with
/// 6-point Lagrange stencils. Values beyond support_radius() are zero.
class PolarExpansion {
  public:
    enum class Kind { Characteristic, Wigner };

    PolarExpansion(const Eigen::MatrixXcd &rho, Kind kind, double step = 0.01);
    PolarExpansion(const FockVector &psi, Kind kind, double step = 0.01);

    Kind kind() const { return kind_; }

    /// chi(x, y) or W(q, p).
    cplx operator()(double x, double y) const;

    /// Radius beyond which the function is below 1e-13 in magnitude.
    double support_radius() const { return radius_; }

    int harmonic_count() const { return static_cast<int>(ks_.size()); }

  private:
    void build(const Eigen::MatrixXcd &rho, int dim);
    void fill_row(const std::vector<std::vector<cplx>> &coeff, const std::vector<int> &start, int dim, double rho,
                  std::vector<cplx> &row) const;

    Kind kind_;
    double step_;
    double radius_ = 0.0;
    int nodes_ = 0;
    std::vector<int> ks_;
    // table_[j * ks_.size() + h] is harmonic ks_[h] at radius (j - 3) * step_
    std::vector<cplx> table_;
};

/// Exact chi on the grid from the Laguerre matrix elements, one radial
/// evaluation per distinct |r|. Throws GuardBandError when the largest
/// displacement |r|/sqrt2 on the grid exceeds 2 sqrt(dim).
CharFn char_fn(const FockVector &psi, const PhaseGrid &grid);
CharFn char_fn(const DensityOperator &rho, const PhaseGrid &grid);

/// Exact W on the grid, same scheme as char_fn.
WignerFn wigner_fn(const FockVector &psi, const PhaseGrid &grid);

/// W sampled from a PolarExpansion of kind Wigner.
WignerFn wigner_fn(const PolarExpansion &w, const PhaseGrid &grid);

/// W(q,p) = (1/4 pi^2) sum chi(x,y) e^{-i(y q - x p)} h^2 on the same grid.
/// Sets `aliased` when the spacing exceeds pi / (2 E).
WignerFn wigner_from_char(const CharFn &cf);

/// Inverse of wigner_from_char.
CharFn char_from_wigner(const WignerFn &w);

/// 2D trapezoid of W.
double integrate(const WignerFn &w);

/// ln of the trapezoid integral of |W|.
double wigner_log_negativity(const WignerFn &w);

/// Grid wide enough for the support of W with spacing at most `max_spacing`.
PhaseGrid negativity_grid(const PolarExpansion &w, double max_spacing = 0.05);

/// WLN of a pure state on negativity_grid.
double wigner_log_negativity(const FockVector &psi, double max_spacing = 0.05);

/// Triplicity t in [lo, hi] whose trisqueezed WLN equals that of the cubic
/// phase state (c, xi). Bisection to 1e-4; BracketError without a sign change.
double match_triplicity(double c, double xi, double lo, double hi, int dim = 120);

/// CSV with header "q,p,value" (Wigner) or "q,p,re,im" (chi).
void write_csv(std::ostream &os, const WignerFn &w);
void write_csv(std::ostream &os, const CharFn &cf);

/// Binary grid: 8-byte magic "CVGRID01", double half_extent, int64 points,
/// int64 components (1 real, 2 complex), then row-major doubles.
void write_binary(std::ostream &os, const WignerFn &w);
void write_binary(std::ostream &os, const CharFn &cf);
WignerFn read_binary_wigner(std::istream &is);
CharFn read_binary_char(std::istream &is);

}  // namespace cvconv
