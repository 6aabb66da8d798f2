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

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cvconv/fock.hpp"
#include "cvconv/phasespace.hpp"
#include "cvconv/statelib.hpp"

namespace cvconv {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// Omega = [[0, 1], [-1, 0]].
const Mat2 &symplectic_form();

/// chi_out(r) = exp(-r^T Omega^T Y Omega r / 4 + i l^T Omega r) chi_in(Omega^T X^T Omega r).
struct GaussianChannel {
    Mat2 X = Mat2::Identity();
    Mat2 Y = Mat2::Zero();
    Vec2 l = Vec2::Zero();

    static GaussianChannel identity() { return {}; }
};

struct CpReport {
    bool cp = false;
    double min_eig_plus = 0.0;   // of Y + i(Omega - X Omega X^T)
    double min_eig_minus = 0.0;  // of Y - i(Omega - X Omega X^T)
    double min_eig_y = 0.0;
    double det_slack = 0.0;      // det Y - (1 - det X)^2
};

/// Eigenvalue form of the complete-positivity condition. Throws InvalidSpec
/// when Y is not symmetric within 1e-12.
CpReport is_cp(const Mat2 &X, const Mat2 &Y, double tol = 1e-9);
inline CpReport is_cp(const GaussianChannel &ch, double tol = 1e-9) { return is_cp(ch.X, ch.Y, tol); }

/// Scalar form: Y >= 0 and det Y >= (1 - det X)^2, both to `tol`.
bool is_cp_det_form(const Mat2 &X, const Mat2 &Y, double tol = 1e-9);

/// Clips negative eigenvalues of Y_raw to zero, then adds the smallest s*I
/// making det Y >= (1 - det X)^2.
GaussianChannel repair(const Mat2 &X, const Mat2 &Y_raw, const Vec2 &l);

/// `second` after `first`: (X2 X1, X2 Y1 X2^T + Y2, X2 l1 + l2).
GaussianChannel compose(const GaussianChannel &first, const GaussianChannel &second);

/// Argument at which the input chi is sampled, Omega^T X^T Omega r.
Vec2 warp(const GaussianChannel &ch, const Vec2 &r);

/// Gaussian prefactor of the channel at r; equals 1 at r = 0.
cplx prefactor(const GaussianChannel &ch, const Vec2 &r);

using ChiEvaluator = std::function<cplx(double, double)>;

/// Lazy post-map chi. Throws RejectedChannel when `ch` fails is_cp.
ChiEvaluator apply_channel(ChiEvaluator in, const GaussianChannel &ch);

enum class ChannelFamily { FullCptp, SymplecticPlusDisplacement, SqueezeOnly };

std::string family_name(ChannelFamily f);
ChannelFamily parse_family(const std::string &name);
int parameter_count(ChannelFamily f);

/// FullCptp: x00 x01 x10 x11 in [-8, 8]; log-eigenvalues of Y in [-12, 4];
/// Y angle in [0, pi); l in [-4, 4]^2.
/// SymplecticPlusDisplacement: X = R(theta) diag(e^s, e^-s) [[1, u], [0, 1]]
/// with theta in [-pi, pi], s in [-3, 3], u in [-6, 6]; l in [-4, 4]^2.
/// SqueezeOnly: Xi in [-3, 3], X = diag(e^-Xi, e^Xi).
std::vector<std::pair<double, double>> default_bounds(ChannelFamily f);

/// Parameters decoding to exactly the identity channel.
std::vector<double> identity_parameters(ChannelFamily f);

/// Channel for a parameter vector; FullCptp goes through repair().
GaussianChannel decode(ChannelFamily f, std::span<const double> params);

/// Flat record x00,x01,x10,x11,y00,y01,y11,l0,l1.
std::vector<double> to_flat(const GaussianChannel &ch);
GaussianChannel from_flat(std::span<const double> v);

/// Overlap normalization fixed on the vacuum, kappa * int |chi_vac|^2 = 1,
/// then checked on five catalog states.
struct Calibration {
    double kappa = 0.0;
    double max_deviation = 0.0;
    std::vector<std::pair<std::string, double>> checks;  // state, kappa * int |chi|^2
};

/// Computed once per process. Throws ConventionError when a check deviates by more than 1e-3.
const Calibration &calibration();

/// chi expansion of a pure state with the support radius of its W.
struct PreparedState {
    explicit PreparedState(const FockVector &psi);

    int dim;
    PolarExpansion chi;
    double wigner_radius;
};

using PreparedPtr = std::shared_ptr<const PreparedState>;

inline PreparedPtr prepare(const FockVector &psi) { return std::make_shared<const PreparedState>(psi); }

/// F = kappa * int chi_out(r) chi_target(-r) dr for a pure target.
class FidelityEvaluator {
  public:
    FidelityEvaluator(const FockVector &input, const FockVector &target);
    FidelityEvaluator(PreparedPtr input, PreparedPtr target);

    /// Lattice aligned with the singular vectors of the warp, with spacing
    /// and extent chosen from the supports of chi and W of both states.
    double operator()(const GaussianChannel &ch) const;

    /// Trapezoid on a fixed square grid.
    double on_grid(const GaussianChannel &ch, const PhaseGrid &grid) const;

    /// Unclamped integral, for diagnostics.
    double raw(const GaussianChannel &ch) const;

    /// Lattice node count used for `ch`.
    long lattice_nodes(const GaussianChannel &ch) const;

    const PolarExpansion &input_chi() const { return in_->chi; }
    const PolarExpansion &target_chi() const { return tgt_->chi; }

  private:
    PreparedPtr in_;
    PreparedPtr tgt_;
};

double fidelity_after_map(const StateSpec &input, const GaussianChannel &ch, const StateSpec &target,
                          const PhaseGrid &grid);

}  // namespace cvconv
