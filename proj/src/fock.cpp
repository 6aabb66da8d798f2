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

#include "cvconv/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "cvconv/errors.hpp"

namespace cvconv {

namespace {

void require_dim(int dim, int min_dim, const char *what) {
    if (dim < min_dim) {
        throw InvalidDimension(std::string(what) + ": dimension " + std::to_string(dim) +
                               " is below the minimum " + std::to_string(min_dim));
    }
}

Eigen::MatrixXcd lowering(int dim) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// Exponentiates `generator` (built at the working dimension) and keeps the
// upper-left block; truncation error concentrates near the working cutoff.
FockOperator exp_projected(const Eigen::MatrixXcd &generator, int dim) {
    Eigen::MatrixXcd u = generator.exp();
    return FockOperator(u.topLeftCorner(dim, dim));
}

}  // namespace

FockVector::FockVector(Eigen::VectorXcd amps) : amps_(std::move(amps)) {
    if (amps_.size() < 1) throw InvalidDimension("FockVector: empty amplitude vector");
}

FockVector FockVector::basis(int dim, int n) {
    require_dim(dim, 1, "FockVector::basis");
    if (n < 0 || n >= dim) throw InvalidDimension("FockVector::basis: level outside truncation");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v[n] = 1.0;
    return FockVector(std::move(v));
}

FockVector FockVector::normalized() const {
    double nrm = norm();
    if (!(nrm > 0.0)) throw InvalidSpec("cannot normalize a zero vector");
    return FockVector(amps_ / nrm);
}

double FockVector::tail_mass(int levels) const {
    int start = std::max(0, dim() - levels);
    return amps_.tail(dim() - start).squaredNorm();
}

FockVector FockVector::resized(int dim) const {
    require_dim(dim, 1, "FockVector::resized");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    int keep = std::min(dim, this->dim());
    v.head(keep) = amps_.head(keep);
    return FockVector(std::move(v));
}

int FockVector::support(double threshold) const {
    for (int n = dim() - 1; n >= 0; --n) {
        if (std::abs(amps_[n]) > threshold) return n + 1;
    }
    return 1;
}

FockOperator::FockOperator(Eigen::MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
        throw InvalidDimension("FockOperator: matrix must be square and nonempty");
    }
}

FockOperator FockOperator::identity(int dim) {
    require_dim(dim, 1, "FockOperator::identity");
    return FockOperator(Eigen::MatrixXcd::Identity(dim, dim));
}

FockOperator FockOperator::operator*(const FockOperator &rhs) const {
    if (dim() != rhs.dim()) throw DimensionMismatch("FockOperator product: dimension mismatch");
    return FockOperator(m_ * rhs.m_);
}

FockVector FockOperator::operator*(const FockVector &v) const {
    if (dim() != v.dim()) throw DimensionMismatch("FockOperator apply: dimension mismatch");
    return FockVector(m_ * v.amps());
}

FockOperator FockOperator::operator+(const FockOperator &rhs) const {
    if (dim() != rhs.dim()) throw DimensionMismatch("FockOperator sum: dimension mismatch");
    return FockOperator(m_ + rhs.m_);
}

FockOperator FockOperator::operator-(const FockOperator &rhs) const {
    if (dim() != rhs.dim()) throw DimensionMismatch("FockOperator difference: dimension mismatch");
    return FockOperator(m_ - rhs.m_);
}

FockOperator FockOperator::projected(int dim) const {
    require_dim(dim, 1, "FockOperator::projected");
    if (dim > this->dim()) throw InvalidDimension("FockOperator::projected: cannot enlarge");
    return FockOperator(m_.topLeftCorner(dim, dim));
}

double FockOperator::unitarity_defect(int levels) const {
    levels = std::clamp(levels, 0, dim());
    if (levels == 0) return 0.0;
    Eigen::MatrixXcd g = m_.adjoint() * m_;
    Eigen::MatrixXcd block = g.topLeftCorner(levels, levels) - Eigen::MatrixXcd::Identity(levels, levels);
    return block.cwiseAbs().maxCoeff();
}

DensityOperator::DensityOperator(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() < 1) {
        throw InvalidDimension("DensityOperator: matrix must be square and nonempty");
    }
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidSpec("DensityOperator: matrix is not Hermitian");
    }
    if (std::abs(rho_.trace() - cplx(1.0)) > 1e-10) {
        throw InvalidSpec("DensityOperator: trace differs from one");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw InvalidSpec("DensityOperator: matrix has a negative eigenvalue");
    }
}

DensityOperator DensityOperator::pure(const FockVector &psi) {
    return DensityOperator(psi.amps() * psi.amps().adjoint());
}

FockOperator annihilation_op(int dim) {
    require_dim(dim, 2, "annihilation_op");
    return FockOperator(lowering(dim));
}

FockOperator creation_op(int dim) {
    require_dim(dim, 2, "creation_op");
    return FockOperator(lowering(dim).adjoint());
}

FockOperator number_op(int dim) {
    require_dim(dim, 1, "number_op");
    Eigen::VectorXcd diag(dim);
    for (int n = 0; n < dim; ++n) diag[n] = static_cast<double>(n);
    return FockOperator(diag.asDiagonal().toDenseMatrix());
}

std::pair<FockOperator, FockOperator> quadrature_ops(int dim) {
    require_dim(dim, 2, "quadrature_ops");
    Eigen::MatrixXcd a = lowering(dim);
    Eigen::MatrixXcd ad = a.adjoint();
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd q = (a + ad) * s;
    Eigen::MatrixXcd p = (a - ad) * (s / cplx(0.0, 1.0));
    return {FockOperator(std::move(q)), FockOperator(std::move(p))};
}

int generator_guard(double magnitude) {
    return std::max(20, static_cast<int>(std::ceil(6.0 * magnitude)));
}

FockOperator displacement_op(cplx beta, int dim) {
    require_dim(dim, 1, "displacement_op");
    if (beta == cplx(0.0)) return FockOperator::identity(dim);
    const double g = std::abs(beta);
    // Level n spreads over ~ g sqrt(2n+1) levels, so the guard grows with dim.
    const int spread = static_cast<int>(std::ceil(1.5 * g * std::sqrt(2.0 * dim + 1.0))) + 10;
    const int work = dim + std::max(generator_guard(g), spread);
    Eigen::MatrixXcd a = lowering(work);
    return exp_projected(beta * a.adjoint() - std::conj(beta) * a, dim);
}

int displacement_unitary_levels(cplx beta, int dim) {
    double root = std::sqrt(static_cast<double>(dim)) - std::abs(beta) - 2.5;
    return root > 0.0 ? static_cast<int>(std::floor(root * root)) : 0;
}

FockOperator squeeze_op(cplx xi, int dim) {
    require_dim(dim, 1, "squeeze_op");
    if (xi == cplx(0.0)) return FockOperator::identity(dim);
    const double r = std::abs(xi);
    // Level n is stretched to ~ n e^{2r}; capped to keep the exponential affordable.
    const int stretch = std::min(static_cast<int>(std::ceil(0.6 * dim * std::expm1(2.0 * r))) + 20, 4 * dim);
    const int work = dim + std::max(generator_guard(r), stretch);
    Eigen::MatrixXcd a = lowering(work);
    Eigen::MatrixXcd a2 = a * a;
    return exp_projected(0.5 * std::conj(xi) * a2 - 0.5 * xi * a2.adjoint(), dim);
}

FockOperator phase_rotation_op(double gamma, int dim) {
    require_dim(dim, 1, "phase_rotation_op");
    Eigen::VectorXcd diag(dim);
    for (int n = 0; n < dim; ++n) diag[n] = std::polar(1.0, -gamma * n);
    return FockOperator(diag.asDiagonal().toDenseMatrix());
}

FockOperator cubic_phase_op(double c, int dim) {
    require_dim(dim, 1, "cubic_phase_op");
    if (c == 0.0) return FockOperator::identity(dim);
    const int work = dim + generator_guard(std::abs(c));
    Eigen::MatrixXcd a = lowering(work);
    Eigen::MatrixXcd q = (a + a.adjoint()) / std::sqrt(2.0);
    Eigen::MatrixXcd q3 = q * q * q;
    return exp_projected(cplx(0.0, c) * q3, dim);
}

FockOperator trisqueeze_op(cplx t, int dim) {
    require_dim(dim, 1, "trisqueeze_op");
    if (t == cplx(0.0)) return FockOperator::identity(dim);
    const int work = dim + generator_guard(std::abs(t));
    Eigen::MatrixXcd a = lowering(work);
    Eigen::MatrixXcd a3 = a * a * a;
    return exp_projected(cplx(0.0, 1.0) * (std::conj(t) * a3 + t * a3.adjoint()), dim);
}

namespace {

// Along diagonal k = m - n >= 0 of D(x), x real,
//   f_n = sqrt(n!/(n+k)!) x^k e^{-x^2/2} L_n^{(k)}(x^2)
// obeys a normalized Laguerre recurrence. The running value is kept as
// mantissa * e^{scale} so that e^{-x^2/2} cannot underflow.
template <class Store>
void diagonal_recurrence(double x, int k, int len, Store &&store) {
    if (x == 0.0) {
        if (k == 0) {
            for (int n = 0; n < len; ++n) store(n, 1.0);
        } else {
            for (int n = 0; n < len; ++n) store(n, 0.0);
        }
        return;
    }
    const double y = x * x;
    const double ksign = (x < 0.0 && (k % 2)) ? -1.0 : 1.0;
    double scale = -0.5 * y - 0.5 * std::lgamma(k + 1.0) + k * std::log(std::abs(x));
    double prev = 0.0, cur = 1.0;
    for (int n = 0; n < len; ++n) {
        if (n == 1) {
            prev = cur;
            cur = (1.0 + k - y) / std::sqrt(1.0 + k) * prev;
        } else if (n > 1) {
            double next = (2.0 * n - 1.0 + k - y) / std::sqrt(static_cast<double>(n) * (n + k)) * cur -
                          std::sqrt((n - 1.0) * (n + k - 1.0) / (static_cast<double>(n) * (n + k))) * prev;
            prev = cur;
            cur = next;
        }
        double mag = std::abs(cur);
        if (mag > 1e150 || (mag < 1e-150 && mag > 0.0)) {
            cur /= mag;
            prev /= mag;
            scale += std::log(mag);
        }
        store(n, cur == 0.0 ? 0.0 : ksign * std::copysign(std::exp(std::log(std::abs(cur)) + scale), cur));
    }
}

}  // namespace

Eigen::MatrixXd displacement_elements(double x, int rows, int cols) {
    require_dim(rows, 1, "displacement_elements");
    require_dim(cols, 1, "displacement_elements");
    Eigen::MatrixXd d(rows, cols);
    for (int k = 0; k < rows; ++k) {
        diagonal_recurrence(x, k, std::min(cols, rows - k), [&](int n, double v) { d(n + k, n) = v; });
    }
    // <m|D(x)|n> = (-1)^{n-m} <n|D(x)|m> for real x
    for (int k = 1; k < cols; ++k) {
        const double sgn = (k % 2) ? -1.0 : 1.0;
        diagonal_recurrence(x, k, std::min(rows, cols - k), [&](int m, double v) { d(m, m + k) = sgn * v; });
    }
    return d;
}

Eigen::MatrixXd displacement_diagonals(double x, int dim, int kmax) {
    require_dim(dim, 1, "displacement_diagonals");
    kmax = std::clamp(kmax, 0, dim - 1);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(kmax + 1, dim);
    for (int k = 0; k <= kmax; ++k) {
        diagonal_recurrence(x, k, dim - k, [&](int n, double v) { d(k, n) = v; });
    }
    return d;
}

FockOperator displacement_op_analytic(cplx beta, int dim) {
    Eigen::MatrixXd d = displacement_elements(std::abs(beta), dim, dim);
    const double theta = std::arg(beta);
    Eigen::MatrixXcd out(dim, dim);
    for (int n = 0; n < dim; ++n) {
        for (int m = 0; m < dim; ++m) out(m, n) = std::polar(d(m, n), theta * (m - n));
    }
    return FockOperator(std::move(out));
}

double overlap_fidelity(const FockVector &a, const FockVector &b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("overlap_fidelity: dimension mismatch");
    return std::norm(a.amps().dot(b.amps()));
}

double mean_photon_number(const FockVector &s) {
    double acc = 0.0;
    for (int n = 1; n < s.dim(); ++n) acc += n * std::norm(s[n]);
    return acc;
}

double db_to_xi(double db) { return db / (20.0 * std::log10(std::exp(1.0))); }

double xi_to_db(double xi) { return 20.0 * std::log10(std::exp(1.0)) * xi; }

}  // namespace cvconv
