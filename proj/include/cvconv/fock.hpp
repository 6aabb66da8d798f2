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

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace cvconv {

using cplx = std::complex<double>;

/// Pure single-mode state as amplitudes over Fock levels 0..dim-1.
class FockVector {
  public:
    FockVector() = default;
    explicit FockVector(Eigen::VectorXcd amps);

    static FockVector basis(int dim, int n);
    static FockVector vacuum(int dim) { return basis(dim, 0); }

    int dim() const { return static_cast<int>(amps_.size()); }
    const Eigen::VectorXcd &amps() const { return amps_; }
    cplx operator[](int n) const { return amps_[n]; }

    double norm() const { return amps_.norm(); }
    FockVector normalized() const;

    /// Probability mass on the top `levels` Fock levels.
    double tail_mass(int levels = 5) const;

    /// Projects onto the first `dim` levels, zero-padding if `dim` is larger.
    FockVector resized(int dim) const;

    /// One past the highest level with |c_n| above `threshold`.
    int support(double threshold = 1e-16) const;

  private:
    Eigen::VectorXcd amps_;
};

/// Dense operator in the truncated Fock basis.
class FockOperator {
  public:
    FockOperator() = default;
    explicit FockOperator(Eigen::MatrixXcd m);

    static FockOperator identity(int dim);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXcd &matrix() const { return m_; }
    cplx operator()(int row, int col) const { return m_(row, col); }

    FockOperator adjoint() const { return FockOperator(m_.adjoint()); }
    FockOperator operator*(const FockOperator &rhs) const;
    FockVector operator*(const FockVector &v) const;
    FockOperator operator+(const FockOperator &rhs) const;
    FockOperator operator-(const FockOperator &rhs) const;
    FockOperator operator*(cplx s) const { return FockOperator(m_ * s); }

    /// Upper-left `dim` x `dim` block.
    FockOperator projected(int dim) const;

    /// max |(U^dag U - I)_{mn}| over m, n < `levels`.
    double unitarity_defect(int levels) const;

  private:
    Eigen::MatrixXcd m_;
};

/// Mixed state. Validated on construction: Hermitian, unit trace, PSD.
class DensityOperator {
  public:
    explicit DensityOperator(Eigen::MatrixXcd rho);
    static DensityOperator pure(const FockVector &psi);

    int dim() const { return static_cast<int>(rho_.rows()); }
    const Eigen::MatrixXcd &matrix() const { return rho_; }
    cplx operator()(int row, int col) const { return rho_(row, col); }

  private:
    Eigen::MatrixXcd rho_;
};

FockOperator annihilation_op(int dim);
FockOperator creation_op(int dim);
FockOperator number_op(int dim);

/// (q, p) with q = (a + a^dag)/sqrt2, p = (a - a^dag)/(sqrt2 i).
std::pair<FockOperator, FockOperator> quadrature_ops(int dim);

/// Guard levels added before exponentiating a generator of strength `magnitude`.
int generator_guard(double magnitude);

/// exp(beta a^dag - beta* a).
FockOperator displacement_op(cplx beta, int dim);

/// Levels n whose displaced column stays inside the truncation, n < (sqrt(dim) - |beta| - 2.5)^2.
/// displacement_op is unitary to ~1e-14 on this subspace.
int displacement_unitary_levels(cplx beta, int dim);

/// exp(xi*/2 a^2 - xi/2 a^dag^2). Real xi > 0 squeezes q.
FockOperator squeeze_op(cplx xi, int dim);

/// exp(-i gamma n), exact.
FockOperator phase_rotation_op(double gamma, int dim);

/// exp(i c q^3).
FockOperator cubic_phase_op(double c, int dim);

/// exp(i (t* a^3 + t a^dag^3)).
FockOperator trisqueeze_op(cplx t, int dim);

/// Real matrix <m|D(x)|n> for real x, m < rows, n < cols, by the
/// three-term recurrence in n. <m|D(x e^{i theta})|n> = e^{i(m-n)theta} <m|D(x)|n>.
Eigen::MatrixXd displacement_elements(double x, int rows, int cols);

/// Row k, column n holds <n+k|D(x)|n> for real x, n + k < dim, k <= kmax.
Eigen::MatrixXd displacement_diagonals(double x, int dim, int kmax);

/// Displacement operator assembled from the analytic matrix elements.
FockOperator displacement_op_analytic(cplx beta, int dim);

/// |<a|b>|^2 for normalized vectors of equal dimension.
double overlap_fidelity(const FockVector &a, const FockVector &b);

double mean_photon_number(const FockVector &s);

/// dB = 10 log10(e^{2 xi}); negative dB gives negative xi.
double db_to_xi(double db);
double xi_to_db(double xi);

}  // namespace cvconv
