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

#include "cvconv/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cvconv/errors.hpp"

namespace cvconv {

namespace {

constexpr double kPi = std::numbers::pi;
// Gaussian factors below e^{-36.8} (about 1e-16) are dropped
constexpr double kGaussCut = 36.8;
constexpr double kSymmetryTol = 1e-12;

Mat2 rotation(double a) {
    Mat2 r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

void check_symmetric(const Mat2 &Y) {
    if (!std::isfinite(Y.sum())) throw InvalidSpec("channel: non-finite Y");
    if (std::abs(Y(0, 1) - Y(1, 0)) > kSymmetryTol * std::max(1.0, Y.cwiseAbs().maxCoeff())) {
        throw InvalidSpec("channel: Y is not symmetric");
    }
}

void check_params(ChannelFamily f, std::span<const double> p) {
    if (static_cast<int>(p.size()) != parameter_count(f)) {
        throw InvalidSpec("channel: " + family_name(f) + " takes " + std::to_string(parameter_count(f)) +
                          " parameters, got " + std::to_string(p.size()));
    }
    for (double v : p) {
        if (!std::isfinite(v)) throw InvalidSpec("channel: non-finite parameter");
    }
}

}  // namespace

const Mat2 &symplectic_form() {
    static const Mat2 omega = (Mat2() << 0.0, 1.0, -1.0, 0.0).finished();
    return omega;
}

CpReport is_cp(const Mat2 &X, const Mat2 &Y, double tol) {
    check_symmetric(Y);
    const Mat2 &om = symplectic_form();
    const Mat2 defect = om - X * om * X.transpose();
    const Mat2 ys = 0.5 * (Y + Y.transpose());
    Eigen::Matrix2cd plus = ys.cast<cplx>() + cplx(0.0, 1.0) * defect.cast<cplx>();
    Eigen::Matrix2cd minus = ys.cast<cplx>() - cplx(0.0, 1.0) * defect.cast<cplx>();
    CpReport rep;
    rep.min_eig_plus = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(plus, Eigen::EigenvaluesOnly).eigenvalues()(0);
    rep.min_eig_minus =
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(minus, Eigen::EigenvaluesOnly).eigenvalues()(0);
    rep.min_eig_y = Eigen::SelfAdjointEigenSolver<Mat2>(ys, Eigen::EigenvaluesOnly).eigenvalues()(0);
    const double dx = X.determinant();
    rep.det_slack = ys.determinant() - (1.0 - dx) * (1.0 - dx);
    rep.cp = rep.min_eig_plus >= -tol && rep.min_eig_minus >= -tol;
    return rep;
}

bool is_cp_det_form(const Mat2 &X, const Mat2 &Y, double tol) {
    check_symmetric(Y);
    const double a = Y(0, 0), d = Y(1, 1), b = 0.5 * (Y(0, 1) + Y(1, 0));
    const double det = a * d - b * b;
    const double c = (1.0 - X.determinant()) * (1.0 - X.determinant());
    // Y >= 0 for a 2x2 symmetric matrix: nonnegative diagonal and determinant
    return a >= -tol && d >= -tol && det >= -tol && det - c >= -tol;
}

GaussianChannel repair(const Mat2 &X, const Mat2 &Y_raw, const Vec2 &l) {
    check_symmetric(Y_raw);
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (Y_raw + Y_raw.transpose()));
    Vec2 lam = es.eigenvalues().cwiseMax(0.0);
    const double dx = X.determinant();
    const double c = (1.0 - dx) * (1.0 - dx);
    // smallest s with (l1 + s)(l2 + s) >= c
    double s = 0.5 * (-(lam(0) + lam(1)) + std::sqrt((lam(0) - lam(1)) * (lam(0) - lam(1)) + 4.0 * c));
    if (s > 0.0) s += 1e-12 * (1.0 + c);
    else s = 0.0;
    GaussianChannel ch;
    ch.X = X;
    ch.Y = es.eigenvectors() * (lam.array() + s).matrix().asDiagonal() * es.eigenvectors().transpose();
    ch.Y = 0.5 * (ch.Y + ch.Y.transpose());
    ch.l = l;
    return ch;
}

GaussianChannel compose(const GaussianChannel &first, const GaussianChannel &second) {
    GaussianChannel out;
    out.X = second.X * first.X;
    out.Y = second.X * first.Y * second.X.transpose() + second.Y;
    out.Y = 0.5 * (out.Y + out.Y.transpose());
    out.l = second.X * first.l + second.l;
    return out;
}

Vec2 warp(const GaussianChannel &ch, const Vec2 &r) {
    const Mat2 &om = symplectic_form();
    return om.transpose() * ch.X.transpose() * om * r;
}

cplx prefactor(const GaussianChannel &ch, const Vec2 &r) {
    const Mat2 &om = symplectic_form();
    const Vec2 u = om * r;
    const double quad = u.dot(ch.Y * u);
    const double phase = ch.l.dot(u);
    return std::exp(-0.25 * quad) * std::polar(1.0, phase);
}

ChiEvaluator apply_channel(ChiEvaluator in, const GaussianChannel &ch) {
    const CpReport rep = is_cp(ch);
    if (!rep.cp) {
        throw RejectedChannel("apply_channel: channel is not completely positive (min eigenvalue " +
                              std::to_string(std::min(rep.min_eig_plus, rep.min_eig_minus)) + ")");
    }
    return [in = std::move(in), ch](double x, double y) {
        const Vec2 r(x, y);
        const Vec2 m = warp(ch, r);
        return prefactor(ch, r) * in(m(0), m(1));
    };
}

std::string family_name(ChannelFamily f) {
    switch (f) {
    case ChannelFamily::FullCptp: return "full_cptp";
    case ChannelFamily::SymplecticPlusDisplacement: return "symplectic_displacement";
    case ChannelFamily::SqueezeOnly: return "squeeze_only";
    }
    return "unknown";
}

ChannelFamily parse_family(const std::string &name) {
    if (name == "full_cptp") return ChannelFamily::FullCptp;
    if (name == "symplectic_displacement") return ChannelFamily::SymplecticPlusDisplacement;
    if (name == "squeeze_only") return ChannelFamily::SqueezeOnly;
    throw InvalidSpec("unknown channel family '" + name + "'");
}

int parameter_count(ChannelFamily f) {
    switch (f) {
    case ChannelFamily::FullCptp: return 9;
    case ChannelFamily::SymplecticPlusDisplacement: return 5;
    case ChannelFamily::SqueezeOnly: return 1;
    }
    return 0;
}

std::vector<std::pair<double, double>> default_bounds(ChannelFamily f) {
    switch (f) {
    case ChannelFamily::FullCptp:
        return {{-8, 8}, {-8, 8}, {-8, 8}, {-8, 8}, {-12, 4}, {-12, 4}, {0, kPi}, {-4, 4}, {-4, 4}};
    case ChannelFamily::SymplecticPlusDisplacement: return {{-kPi, kPi}, {-3, 3}, {-6, 6}, {-4, 4}, {-4, 4}};
    case ChannelFamily::SqueezeOnly: return {{-3, 3}};
    }
    return {};
}

std::vector<double> identity_parameters(ChannelFamily f) {
    switch (f) {
    case ChannelFamily::FullCptp: return {1, 0, 0, 1, -12, -12, 0, 0, 0};
    case ChannelFamily::SymplecticPlusDisplacement: return {0, 0, 0, 0, 0};
    case ChannelFamily::SqueezeOnly: return {0};
    }
    return {};
}

GaussianChannel decode(ChannelFamily f, std::span<const double> p) {
    check_params(f, p);
    GaussianChannel ch;
    switch (f) {
    case ChannelFamily::FullCptp: {
        Mat2 X;
        X << p[0], p[1], p[2], p[3];
        // eigenvalue e^s - e^{lo}: the lower bound decodes to exactly 0
        const double lo = std::exp(default_bounds(f)[4].first);
        const Vec2 lam(std::max(0.0, std::exp(p[4]) - lo), std::max(0.0, std::exp(p[5]) - lo));
        const Mat2 R = rotation(p[6]);
        const Mat2 Y = R * lam.asDiagonal() * R.transpose();
        return repair(X, 0.5 * (Y + Y.transpose()), Vec2(p[7], p[8]));
    }
    case ChannelFamily::SymplecticPlusDisplacement: {
        Mat2 a = Mat2::Zero(), n = Mat2::Identity();
        a(0, 0) = std::exp(p[1]);
        a(1, 1) = std::exp(-p[1]);
        n(0, 1) = p[2];
        ch.X = rotation(p[0]) * a * n;
        ch.l = Vec2(p[3], p[4]);
        return ch;
    }
    case ChannelFamily::SqueezeOnly:
        ch.X(0, 0) = std::exp(-p[0]);
        ch.X(1, 1) = std::exp(p[0]);
        return ch;
    }
    return ch;
}

std::vector<double> to_flat(const GaussianChannel &ch) {
    return {ch.X(0, 0), ch.X(0, 1), ch.X(1, 0), ch.X(1, 1), ch.Y(0, 0), ch.Y(0, 1), ch.Y(1, 1), ch.l(0), ch.l(1)};
}

GaussianChannel from_flat(std::span<const double> v) {
    if (v.size() != 9) throw InvalidSpec("channel record needs 9 entries");
    for (double x : v) {
        if (!std::isfinite(x)) throw InvalidSpec("channel record: non-finite entry");
    }
    GaussianChannel ch;
    ch.X << v[0], v[1], v[2], v[3];
    ch.Y << v[4], v[5], v[5], v[6];
    ch.l << v[7], v[8];
    return ch;
}

// ---------------------------------------------------------------------------
// Overlap integral

namespace {

struct Lattice {
    Vec2 v1, v2;
    double h1 = 0.0, h2 = 0.0;
    int n1 = 0, n2 = 0;
};

// f(r) = P(r) chi_in(M r) conj(chi_tgt(r)) has f(-r) = conj f(r), so the sum
// over a lattice symmetric about the origin is f(0) + 2 Re(half).
struct Integrand {
    const GaussianChannel &ch;
    const PolarExpansion &in;
    const PolarExpansion &tgt;
    Mat2 M;
    Mat2 A;  // Omega^T Y Omega
    Vec2 w;  // Omega^T l, phase l^T Omega r = w . r

    Integrand(const GaussianChannel &c, const PolarExpansion &i, const PolarExpansion &t) : ch(c), in(i), tgt(t) {
        const Mat2 &om = symplectic_form();
        M = om.transpose() * c.X.transpose() * om;
        A = om.transpose() * c.Y * om;
        w = om.transpose() * c.l;
    }

    // false when the node is outside the joint support
    bool eval(const Vec2 &r, cplx &out) const {
        const double rr = r.norm();
        if (rr >= tgt.support_radius()) return false;
        const Vec2 m = M * r;
        if (m.norm() >= in.support_radius()) return false;
        const double g = 0.25 * r.dot(A * r);
        if (g > kGaussCut) return false;
        out = std::exp(-g) * std::polar(1.0, w.dot(r)) * in(m(0), m(1)) * std::conj(tgt(r(0), r(1)));
        return true;
    }
};

Lattice plan_lattice(const Integrand &f, double w_in, double w_tgt) {
    Eigen::JacobiSVD<Mat2> svd(f.M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat2 V = svd.matrixV();
    const Vec2 sig = svd.singularValues();
    Eigen::SelfAdjointEigenSolver<Mat2> ea(0.5 * (f.A + f.A.transpose()));
    const bool a_inv = ea.eigenvalues()(0) > 1e-12 * std::max(1.0, ea.eigenvalues()(1));
    const Mat2 a_pinv =
        a_inv ? Mat2(ea.eigenvectors() * ea.eigenvalues().cwiseInverse().asDiagonal() * ea.eigenvectors().transpose())
              : Mat2::Zero();

    Lattice lat;
    lat.v1 = V.col(0);
    lat.v2 = V.col(1);
    const double s_in = f.in.support_radius(), s_tgt = f.tgt.support_radius();
    double h[2];
    int n[2];
    for (int i = 0; i < 2; ++i) {
        const Vec2 v = V.col(i);
        // half-bandwidth of f along v: target, warped input, Gaussian, phase
        const double band = w_tgt + sig(i) * w_in + std::sqrt(kGaussCut * std::max(0.0, v.dot(f.A * v))) +
                            std::abs(f.w.dot(v));
        h[i] = 2.0 * kPi / band;
        double ext = s_tgt;
        if (sig(i) > 0.0) ext = std::min(ext, s_in / sig(i));
        if (a_inv) ext = std::min(ext, std::sqrt(4.0 * kGaussCut * v.dot(a_pinv * v)));
        n[i] = static_cast<int>(std::ceil(ext / h[i]));
    }
    lat.h1 = h[0];
    lat.h2 = h[1];
    lat.n1 = n[0];
    lat.n2 = n[1];
    return lat;
}

double lattice_integral(const Integrand &f, const Lattice &lat) {
    double half = 0.0;
    for (int a = 0; a <= lat.n1; ++a) {
        for (int b = (a == 0 ? 1 : -lat.n2); b <= lat.n2; ++b) {
            const Vec2 r = (a * lat.h1) * lat.v1 + (b * lat.h2) * lat.v2;
            cplx v;
            if (f.eval(r, v)) half += v.real();
        }
    }
    return (1.0 + 2.0 * half) * lat.h1 * lat.h2;
}

double wigner_radius(const FockVector &psi) {
    return PolarExpansion(psi, PolarExpansion::Kind::Wigner, 0.1).support_radius();
}

double clamp_fidelity(double f) {
    if (!std::isfinite(f) || f < -1e-3 || f > 1.0 + 1e-3) {
        throw ConventionError("fidelity " + std::to_string(f) + " outside [0, 1] beyond tolerance");
    }
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace

const Calibration &calibration() {
    static const Calibration cal = [] {
        Calibration c;
        const FockVector vac = FockVector::vacuum(8);
        const PolarExpansion chi(vac, PolarExpansion::Kind::Characteristic);
        const GaussianChannel id;
        const Integrand f(id, chi, chi);
        c.kappa = 1.0 / lattice_integral(f, plan_lattice(f, wigner_radius(vac), wigner_radius(vac)));

        const std::vector<StateSpec> states = {
            FockBasis{3},
            SqueezedCoherent{cplx(1.0, 0.5), 0.4, 0.3},
            CatCode{2, cplx(2.0), 0, 0.0, 0.0},
            BinomialCode{2, 2, 1},
            Pass{-2, cplx(0.0, 1.0), cplx(0.5), 0.0},
        };
        for (const auto &s : states) {
            const FockVector psi = build_state_auto(s);
            const PolarExpansion p(psi, PolarExpansion::Kind::Characteristic);
            const Integrand g(id, p, p);
            const double w = wigner_radius(psi);
            const double v = c.kappa * lattice_integral(g, plan_lattice(g, w, w));
            c.checks.emplace_back(to_record(s), v);
            c.max_deviation = std::max(c.max_deviation, std::abs(v - 1.0));
        }
        if (c.max_deviation > 1e-3) {
            throw ConventionError("overlap normalization inconsistent across states (deviation " +
                                  std::to_string(c.max_deviation) + ")");
        }
        return c;
    }();
    return cal;
}

PreparedState::PreparedState(const FockVector &psi)
    : dim(psi.dim()), chi(psi, PolarExpansion::Kind::Characteristic), wigner_radius(cvconv::wigner_radius(psi)) {}

FidelityEvaluator::FidelityEvaluator(const FockVector &input, const FockVector &target)
    : FidelityEvaluator(prepare(input), prepare(target)) {}

FidelityEvaluator::FidelityEvaluator(PreparedPtr input, PreparedPtr target)
    : in_(std::move(input)), tgt_(std::move(target)) {
    if (!in_ || !tgt_) throw InvalidSpec("FidelityEvaluator: null prepared state");
}

double FidelityEvaluator::raw(const GaussianChannel &ch) const {
    const CpReport rep = is_cp(ch);
    if (!rep.cp) throw RejectedChannel("fidelity: channel is not completely positive");
    const Integrand f(ch, in_->chi, tgt_->chi);
    return calibration().kappa * lattice_integral(f, plan_lattice(f, in_->wigner_radius, tgt_->wigner_radius));
}

double FidelityEvaluator::operator()(const GaussianChannel &ch) const { return clamp_fidelity(raw(ch)); }

long FidelityEvaluator::lattice_nodes(const GaussianChannel &ch) const {
    const Integrand f(ch, in_->chi, tgt_->chi);
    const Lattice lat = plan_lattice(f, in_->wigner_radius, tgt_->wigner_radius);
    return (2L * lat.n1 + 1) * (2L * lat.n2 + 1);
}

double FidelityEvaluator::on_grid(const GaussianChannel &ch, const PhaseGrid &grid) const {
    if (!is_cp(ch).cp) throw RejectedChannel("fidelity: channel is not completely positive");
    const Integrand f(ch, in_->chi, tgt_->chi);
    const double h = grid.spacing();
    const int last = grid.points - 1;
    double sum = 0.0;
    for (int i = 0; i < grid.points; ++i) {
        const double wi = (i == 0 || i == last) ? 0.5 : 1.0;
        for (int j = 0; j < grid.points; ++j) {
            const double wj = (j == 0 || j == last) ? 0.5 : 1.0;
            cplx v;
            if (f.eval(Vec2(grid.coord(i), grid.coord(j)), v)) sum += wi * wj * v.real();
        }
    }
    return clamp_fidelity(calibration().kappa * sum * h * h);
}

double fidelity_after_map(const StateSpec &input, const GaussianChannel &ch, const StateSpec &target,
                          const PhaseGrid &grid) {
    const FidelityEvaluator ev(build_state_auto(input), build_state_auto(target));
    return ev.on_grid(ch, grid);
}

}  // namespace cvconv
