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

#include "cvconv/phasespace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "cvconv/errors.hpp"
#include "cvconv/statelib.hpp"

namespace cvconv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegligible = 1e-13;

// Diagonal coefficients c_k[n] = rho_{n,n+k}, times (-1)^n for the Wigner kind,
// for every k with a nonzero entry. Shared by the exact and tabulated evaluators.
struct Diagonals {
    int dim = 0;
    int kmax = 0;
    double radial_scale = 0.0;  // b = radial_scale * |r|
    bool wigner = false;
    std::vector<int> ks;
    std::vector<std::vector<cplx>> coeff;

    Diagonals(const Eigen::MatrixXcd &rho, bool is_wigner) : wigner(is_wigner) {
        // effective support: last row/column with a nonzero entry
        int n = static_cast<int>(rho.rows());
        while (n > 1 && rho.row(n - 1).cwiseAbs().maxCoeff() == 0.0 && rho.col(n - 1).cwiseAbs().maxCoeff() == 0.0) --n;
        dim = n;
        radial_scale = wigner ? std::numbers::sqrt2 : 1.0 / std::numbers::sqrt2;
        for (int k = 0; k < dim; ++k) {
            std::vector<cplx> c(dim - k);
            double big = 0.0;
            for (int i = 0; i + k < dim; ++i) {
                c[i] = rho(i, i + k);
                if (wigner && (i % 2)) c[i] = -c[i];
                big = std::max(big, std::abs(c[i]));
            }
            if (big > 1e-15) {
                ks.push_back(k);
                coeff.push_back(std::move(c));
                kmax = k;
            }
        }
    }

    // H_k(|r|) for every kept k.
    void harmonics(double radius, std::vector<cplx> &out) const {
        Eigen::MatrixXd d = displacement_diagonals(radial_scale * radius, dim, kmax);
        out.assign(ks.size(), 0.0);
        for (std::size_t h = 0; h < ks.size(); ++h) {
            const int k = ks[h];
            cplx acc = 0.0;
            const auto &c = coeff[h];
            for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * d(k, static_cast<int>(i));
            out[h] = acc;
        }
    }

    // Harmonic sum at angle theta.
    cplx combine(const std::vector<cplx> &hk, double theta) const {
        cplx acc = 0.0;
        for (std::size_t h = 0; h < ks.size(); ++h) {
            const int k = ks[h];
            const cplx e = std::polar(1.0, k * theta);
            if (k == 0) {
                acc += hk[h];
            } else if (wigner) {
                acc += 2.0 * (hk[h] * e).real();
            } else {
                acc += hk[h] * e + ((k % 2) ? -1.0 : 1.0) * std::conj(hk[h]) / e;
            }
        }
        return wigner ? acc.real() / kPi : acc;
    }

    double bound(const std::vector<cplx> &hk) const {
        double b = 0.0;
        for (const auto &v : hk) b += 2.0 * std::abs(v);
        return wigner ? b / kPi : b;
    }
};

Eigen::MatrixXcd pure_density(const FockVector &psi) {
    const int n = psi.support();
    Eigen::VectorXcd v = psi.amps().head(n);
    return v * v.adjoint();
}

// Visits every grid node grouped by distinct radius (octant symmetry).
template <class Radial, class Node>
void for_each_radius(const PhaseGrid &grid, Radial &&radial, Node &&node) {
    const int c = grid.points / 2;
    const double h = grid.spacing();
    for (int u = 0; u <= c; ++u) {
        for (int v = 0; v <= u; ++v) {
            radial(h * std::hypot(static_cast<double>(u), static_cast<double>(v)));
            std::array<std::pair<int, int>, 8> pts{{{u, v}, {-u, v}, {u, -v}, {-u, -v}, {v, u}, {-v, u}, {v, -u}, {-v, -u}}};
            for (std::size_t p = 0; p < pts.size(); ++p) {
                bool dup = false;
                for (std::size_t q = 0; q < p; ++q) dup = dup || pts[q] == pts[p];
                if (!dup) node(pts[p].first + c, pts[p].second + c);
            }
        }
    }
}

std::vector<double> trapezoid_weights(const PhaseGrid &grid) {
    std::vector<double> w(grid.points, grid.spacing());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

void write_header(std::ostream &os, const PhaseGrid &g, std::int64_t comps) {
    os.write("CVGRID01", 8);
    os.write(reinterpret_cast<const char *>(&g.half_extent), sizeof(double));
    std::int64_t pts = g.points;
    os.write(reinterpret_cast<const char *>(&pts), sizeof pts);
    os.write(reinterpret_cast<const char *>(&comps), sizeof comps);
}

PhaseGrid read_header(std::istream &is, std::int64_t expect_comps) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "CVGRID01", 8) != 0) throw InvalidSpec("not a cvconv grid file");
    double extent = 0.0;
    std::int64_t pts = 0, comps = 0;
    is.read(reinterpret_cast<char *>(&extent), sizeof extent);
    is.read(reinterpret_cast<char *>(&pts), sizeof pts);
    is.read(reinterpret_cast<char *>(&comps), sizeof comps);
    if (!is || comps != expect_comps) throw InvalidSpec("grid file has unexpected layout");
    return PhaseGrid::make(extent, static_cast<int>(pts));
}

}  // namespace

PhaseGrid PhaseGrid::make(double half_extent, int points) {
    if (!(half_extent > 0.0) || !std::isfinite(half_extent)) throw InvalidSpec("grid half extent must be positive");
    if (points < 3 || points % 2 == 0) throw InvalidSpec("grid needs an odd number of points >= 3");
    return PhaseGrid{half_extent, points};
}

PhaseGrid default_grid(const FockVector &psi, double alpha_scale) {
    double e = 3.0 * std::sqrt(2.0 * mean_photon_number(psi) + 1.0) + std::numbers::sqrt2 * alpha_scale;
    return PhaseGrid::make(std::max(6.0, e), 257);
}

PolarExpansion::PolarExpansion(const Eigen::MatrixXcd &rho, Kind kind, double step) : kind_(kind), step_(step) {
    if (rho.rows() != rho.cols() || rho.rows() < 1) throw InvalidDimension("PolarExpansion: square matrix required");
    if (!(step > 0.0)) throw InvalidSpec("PolarExpansion: step must be positive");
    build(rho, static_cast<int>(rho.rows()));
}

PolarExpansion::PolarExpansion(const FockVector &psi, Kind kind, double step)
    : PolarExpansion(pure_density(psi), kind, step) {}

void PolarExpansion::build(const Eigen::MatrixXcd &rho, int) {
    Diagonals diag(rho, kind_ == Kind::Wigner);
    ks_ = diag.ks;

    // Coarse outward scan for the support radius: the last radius whose
    // harmonic bound exceeds kNegligible, confirmed over a 2-unit stretch.
    std::vector<cplx> hk;
    const double coarse = 0.1;
    const double cap = 4.0 * std::sqrt(static_cast<double>(diag.dim)) + 24.0;
    double last = 0.0;
    for (double r = 0.0; r <= cap; r += coarse) {
        diag.harmonics(r, hk);
        if (diag.bound(hk) > kNegligible) last = r;
        else if (r > last + 2.0) break;
    }
    radius_ = last + coarse;
    nodes_ = static_cast<int>(std::ceil(radius_ / step_)) + 1;
    radius_ = (nodes_ - 1) * step_;

    const std::size_t nh = ks_.size();
    table_.assign(nh * (nodes_ + 6), 0.0);
    for (int j = 0; j < nodes_; ++j) {
        diag.harmonics(j * step_, hk);
        for (std::size_t h = 0; h < ks_.size(); ++h) table_[(j + 3) * nh + h] = hk[h];
    }
    // H_k(-r) = (-1)^k H_k(r) fills the stencil below the origin
    for (std::size_t h = 0; h < ks_.size(); ++h) {
        const double par = (ks_[h] % 2) ? -1.0 : 1.0;
        for (int j = 1; j <= 3; ++j) table_[(3 - j) * nh + h] = par * table_[(3 + j) * nh + h];
    }
}

cplx PolarExpansion::operator()(double x, double y) const {
    const double rho = std::hypot(x, y);
    if (rho >= radius_) return 0.0;
    const double s = rho / step_;
    const int j = static_cast<int>(s);
    const double t = s - j;
    // Lagrange weights on offsets -2..3
    // Lagrange weights on offsets -2..3; denominators are fixed
    static constexpr std::array<double, 6> inv_den = {-1.0 / 120, 1.0 / 24, -1.0 / 12, 1.0 / 12, -1.0 / 24, 1.0 / 120};
    const std::array<double, 6> d = {t + 2, t + 1, t, t - 1, t - 2, t - 3};
    std::array<double, 6> w;
    for (int i = 0; i < 6; ++i) {
        double num = inv_den[i];
        for (int m = 0; m < 6; ++m) {
            if (m != i) num *= d[m];
        }
        w[i] = num;
    }
    // e^{i k theta} by repeated multiplication; ks_ is ascending
    const cplx e1 = rho > 0.0 ? cplx(x / rho, y / rho) : cplx(1.0);
    cplx e = 1.0;
    int kk = 0;
    const std::size_t nh = ks_.size();
    const cplx *base = &table_[(j + 1) * nh];
    const bool wig = kind_ == Kind::Wigner;
    cplx acc = 0.0;
    for (std::size_t h = 0; h < ks_.size(); ++h) {
        const cplx *c = base + h;
        const cplx v = w[0] * c[0] + w[1] * c[nh] + w[2] * c[2 * nh] + w[3] * c[3 * nh] + w[4] * c[4 * nh] +
                       w[5] * c[5 * nh];
        const int k = ks_[h];
        if (k == 0) {
            acc += v;
            continue;
        }
        while (kk < k) {
            e *= e1;
            ++kk;
        }
        if (wig) {
            acc += 2.0 * (v * e).real();
        } else {
            acc += v * e + ((k % 2) ? -1.0 : 1.0) * std::conj(v) * std::conj(e);
        }
    }
    return wig ? cplx(acc.real() / kPi) : acc;
}

namespace {

CharFn exact_char_fn(const Eigen::MatrixXcd &rho, int dim, const PhaseGrid &grid) {
    // the largest displacement on the square grid is |r|max / sqrt2 = E
    if (grid.half_extent > 2.0 * std::sqrt(static_cast<double>(dim))) {
        throw GuardBandError("char_fn: grid extent " + std::to_string(grid.half_extent) +
                             " is too large for truncation " + std::to_string(dim));
    }
    Diagonals diag(rho, false);
    CharFn out{grid, Eigen::MatrixXcd::Zero(grid.points, grid.points)};
    std::vector<cplx> hk;
    const int c = grid.points / 2;
    const double h = grid.spacing();
    for_each_radius(
        grid, [&](double r) { diag.harmonics(r, hk); },
        [&](int i, int j) { out.values(i, j) = diag.combine(hk, std::atan2((j - c) * h, (i - c) * h)); });
    return out;
}

}  // namespace

CharFn char_fn(const DensityOperator &rho, const PhaseGrid &grid) {
    return exact_char_fn(rho.matrix(), rho.dim(), grid);
}

CharFn char_fn(const FockVector &psi, const PhaseGrid &grid) {
    return exact_char_fn(pure_density(psi), psi.dim(), grid);
}

WignerFn wigner_fn(const FockVector &psi, const PhaseGrid &grid) {
    Diagonals diag(pure_density(psi), true);
    WignerFn out{grid, Eigen::MatrixXd::Zero(grid.points, grid.points)};
    std::vector<cplx> hk;
    const int c = grid.points / 2;
    const double h = grid.spacing();
    for_each_radius(
        grid, [&](double r) { diag.harmonics(r, hk); },
        [&](int i, int j) { out.values(i, j) = diag.combine(hk, std::atan2((j - c) * h, (i - c) * h)).real(); });
    return out;
}

WignerFn wigner_fn(const PolarExpansion &w, const PhaseGrid &grid) {
    if (w.kind() != PolarExpansion::Kind::Wigner) throw InvalidSpec("wigner_fn needs a Wigner expansion");
    WignerFn out{grid, Eigen::MatrixXd::Zero(grid.points, grid.points)};
    for (int i = 0; i < grid.points; ++i) {
        for (int j = 0; j < grid.points; ++j) out.values(i, j) = w(grid.coord(i), grid.coord(j)).real();
    }
    return out;
}

WignerFn wigner_from_char(const CharFn &cf) {
    const PhaseGrid &g = cf.grid;
    const int n = g.points;
    std::vector<double> w = trapezoid_weights(g);
    Eigen::MatrixXcd e1(n, n), e2(n, n);
    for (int j = 0; j < n; ++j) {
        for (int a = 0; a < n; ++a) {
            e1(j, a) = std::polar(w[j], -g.coord(j) * g.coord(a));
            e2(j, a) = std::polar(w[j], g.coord(j) * g.coord(a));
        }
    }
    // W[a,b] = sum_i e2(i,b) sum_j chi(i,j) e1(j,a) / (4 pi^2)
    Eigen::MatrixXcd t = cf.values * e1;
    Eigen::MatrixXcd wc = (t.transpose() * e2) / (4.0 * kPi * kPi);
    WignerFn out{g, wc.real(), false, wc.imag().cwiseAbs().maxCoeff()};
    out.aliased = g.spacing() > kPi / (2.0 * g.half_extent);
    return out;
}

CharFn char_from_wigner(const WignerFn &wf) {
    const PhaseGrid &g = wf.grid;
    const int n = g.points;
    std::vector<double> w = trapezoid_weights(g);
    Eigen::MatrixXcd f1(n, n), f2(n, n);
    for (int a = 0; a < n; ++a) {
        for (int j = 0; j < n; ++j) {
            f1(a, j) = std::polar(w[a], g.coord(j) * g.coord(a));
            f2(a, j) = std::polar(w[a], -g.coord(j) * g.coord(a));
        }
    }
    // chi[i,j] = sum_{a,b} f2(b,i) W(a,b) f1(a,j)
    Eigen::MatrixXcd wc = wf.values.cast<cplx>();
    Eigen::MatrixXcd chi = f2.transpose() * wc.transpose() * f1;
    return CharFn{g, chi};
}

double integrate(const WignerFn &wf) {
    std::vector<double> w = trapezoid_weights(wf.grid);
    Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
    return wv.dot(wf.values * wv);
}

double wigner_log_negativity(const WignerFn &wf) {
    std::vector<double> w = trapezoid_weights(wf.grid);
    Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
    return std::log(wv.dot(wf.values.cwiseAbs() * wv));
}

PhaseGrid negativity_grid(const PolarExpansion &w, double max_spacing) {
    const double e = w.support_radius() + 0.5;
    const int half = static_cast<int>(std::ceil(e / max_spacing));
    return PhaseGrid::make(half * max_spacing, 2 * half + 1);
}

double wigner_log_negativity(const FockVector &psi, double max_spacing) {
    PolarExpansion w(psi, PolarExpansion::Kind::Wigner);
    return wigner_log_negativity(wigner_fn(w, negativity_grid(w, max_spacing)));
}

double match_triplicity(double c, double xi, double lo, double hi, int dim) {
    if (!(hi > lo)) throw BracketError("match_triplicity: empty bracket");
    const double target = wigner_log_negativity(build_state_auto(CubicPhase{c, xi}, dim));
    auto f = [&](double t) { return wigner_log_negativity(build_state(Trisqueezed{t}, dim)) - target; };
    double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0.0) {
        throw BracketError("match_triplicity: no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                           "] for c=" + std::to_string(c) + ", xi=" + std::to_string(xi));
    }
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void write_csv(std::ostream &os, const WignerFn &w) {
    os << "q,p,value\n";
    os.precision(17);
    for (int i = 0; i < w.grid.points; ++i) {
        for (int j = 0; j < w.grid.points; ++j) {
            os << w.grid.coord(i) << ',' << w.grid.coord(j) << ',' << w.values(i, j) << '\n';
        }
    }
}

void write_csv(std::ostream &os, const CharFn &cf) {
    os << "q,p,re,im\n";
    os.precision(17);
    for (int i = 0; i < cf.grid.points; ++i) {
        for (int j = 0; j < cf.grid.points; ++j) {
            const cplx v = cf.values(i, j);
            os << cf.grid.coord(i) << ',' << cf.grid.coord(j) << ',' << v.real() << ',' << v.imag() << '\n';
        }
    }
}

void write_binary(std::ostream &os, const WignerFn &w) {
    write_header(os, w.grid, 1);
    for (int i = 0; i < w.grid.points; ++i) {
        for (int j = 0; j < w.grid.points; ++j) {
            double v = w.values(i, j);
            os.write(reinterpret_cast<const char *>(&v), sizeof v);
        }
    }
}

void write_binary(std::ostream &os, const CharFn &cf) {
    write_header(os, cf.grid, 2);
    for (int i = 0; i < cf.grid.points; ++i) {
        for (int j = 0; j < cf.grid.points; ++j) {
            double v[2] = {cf.values(i, j).real(), cf.values(i, j).imag()};
            os.write(reinterpret_cast<const char *>(v), sizeof v);
        }
    }
}

WignerFn read_binary_wigner(std::istream &is) {
    PhaseGrid g = read_header(is, 1);
    WignerFn w{g, Eigen::MatrixXd(g.points, g.points)};
    for (int i = 0; i < g.points; ++i) {
        for (int j = 0; j < g.points; ++j) is.read(reinterpret_cast<char *>(&w.values(i, j)), sizeof(double));
    }
    if (!is) throw InvalidSpec("truncated grid file");
    return w;
}

CharFn read_binary_char(std::istream &is) {
    PhaseGrid g = read_header(is, 2);
    CharFn cf{g, Eigen::MatrixXcd(g.points, g.points)};
    for (int i = 0; i < g.points; ++i) {
        for (int j = 0; j < g.points; ++j) {
            double v[2];
            is.read(reinterpret_cast<char *>(v), sizeof v);
            cf.values(i, j) = cplx(v[0], v[1]);
        }
    }
    if (!is) throw InvalidSpec("truncated grid file");
    return cf;
}

}  // namespace cvconv
