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

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cvconv/errors.hpp"
#include "cvconv/phasespace.hpp"
#include "cvconv/statelib.hpp"

using namespace cvconv;

namespace {

constexpr double kPi = std::numbers::pi;

// W(x,p) = (1/pi) int psi*(x+y) psi(x-y) e^{2ipy} dy from Hermite-function wave functions.
double position_wigner(const FockVector &psi, double x, double p) {
    const int d = psi.dim();
    auto wave = [&](double u) {
        Eigen::VectorXd h(d);
        h[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * u * u);
        if (d > 1) h[1] = std::sqrt(2.0) * u * h[0];
        for (int n = 2; n < d; ++n) h[n] = std::sqrt(2.0 / n) * u * h[n - 1] - std::sqrt((n - 1.0) / n) * h[n - 2];
        return h.cast<cplx>().dot(psi.amps());
    };
    const double step = 0.01;
    cplx acc = 0.0;
    for (double y = -14.0; y <= 14.0; y += step) {
        acc += std::conj(wave(x + y)) * wave(x - y) * std::polar(1.0, 2.0 * p * y);
    }
    return (acc * step).real() / kPi;
}

std::vector<StateSpec> catalog() {
    return {FockBasis{0},
            CatCode{1, 2.0, 0, 0.0, 0.0},
            CatCode{2, {1.5, 0.5}, 1, 0.0, 0.0},
            BinomialCode{2, 2, 0},
            Pass{-2, 0.0, 0.7, 0.0},
            Pass{3, 0.0, db_to_xi(3.0), 0.0},
            CubicPhase{0.1, db_to_xi(-5.0)},
            Trisqueezed{0.1},
            Gkp{std::pow(10.0, -5.0 / 20.0), 0, 0},
            SqueezedCoherent{{0.5, -0.3}, 0.4, 0.2}};
}

}  // namespace

TEST(Grid, Validation) {
    EXPECT_THROW(PhaseGrid::make(5.0, 10), InvalidSpec);
    EXPECT_THROW(PhaseGrid::make(-1.0, 11), InvalidSpec);
    PhaseGrid g = PhaseGrid::make(5.0, 11);
    EXPECT_DOUBLE_EQ(g.coord(5), 0.0);
    EXPECT_DOUBLE_EQ(g.spacing(), 1.0);
    EXPECT_DOUBLE_EQ(default_grid(FockVector::vacuum(10)).half_extent, 6.0);
    EXPECT_EQ(default_grid(FockVector::vacuum(10)).points, 257);
}

TEST(CharFn, VacuumClosedForm) {
    FockVector vac = FockVector::vacuum(40);
    PolarExpansion pe(vac, PolarExpansion::Kind::Characteristic);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (int i = 0; i < 20; ++i) {
        double x = u(rng), y = u(rng);
        EXPECT_NEAR(std::abs(pe(x, y) - std::exp(-(x * x + y * y) / 4.0)), 0.0, 1e-8);
    }
    CharFn cf = char_fn(vac, PhaseGrid::make(6.0, 41));
    for (int i = 0; i < 41; i += 3) {
        for (int j = 0; j < 41; j += 5) {
            double x = cf.grid.coord(i), y = cf.grid.coord(j);
            EXPECT_NEAR(std::abs(cf.values(i, j) - std::exp(-(x * x + y * y) / 4.0)), 0.0, 1e-12);
        }
    }
}

TEST(CharFn, SinglePhotonLaguerre) {
    FockVector one = FockVector::basis(20, 1);
    PolarExpansion pe(one, PolarExpansion::Kind::Characteristic);
    CharFn cf = char_fn(one, PhaseGrid::make(5.0, 21));
    for (int i = 0; i < 21; ++i) {
        for (int j = 0; j < 21; ++j) {
            double x = cf.grid.coord(i), y = cf.grid.coord(j), r2 = x * x + y * y;
            double expect = (1.0 - r2 / 2.0) * std::exp(-r2 / 4.0);
            EXPECT_NEAR(std::abs(cf.values(i, j) - expect), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(pe(x, y) - expect), 0.0, 1e-9);
        }
    }
}

TEST(CharFn, CoherentStatePhase) {
    // chi of |alpha> is exp(-|r|^2/4) e^{i sqrt2 (y Re alpha - x Im alpha)}.
    const cplx alpha(0.8, -0.4);
    FockVector c = build_state(SqueezedCoherent{alpha, 0.0, 0.0}, 60);
    CharFn cf = char_fn(c, PhaseGrid::make(4.0, 17));
    for (int i = 0; i < 17; ++i) {
        for (int j = 0; j < 17; ++j) {
            double x = cf.grid.coord(i), y = cf.grid.coord(j);
            cplx expect = std::exp(-(x * x + y * y) / 4.0) *
                          std::polar(1.0, std::numbers::sqrt2 * (y * alpha.real() - x * alpha.imag()));
            EXPECT_NEAR(std::abs(cf.values(i, j) - expect), 0.0, 1e-10);
        }
    }
}

TEST(CharFn, CatalogNormalizationAndHermiticity) {
    for (const auto &spec : catalog()) {
        FockVector psi = build_state_auto(spec);
        PhaseGrid g = default_grid(psi, displacement_scale(spec));
        g = PhaseGrid::make(g.half_extent, 65);
        CharFn cf = char_fn(psi, g);
        const int n = g.points, c = n / 2;
        EXPECT_NEAR(std::abs(cf.values(c, c) - 1.0), 0.0, 1e-8) << family_name(spec);
        double herm = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                herm = std::max(herm, std::abs(cf.values(i, j) - std::conj(cf.values(n - 1 - i, n - 1 - j))));
            }
        }
        EXPECT_LT(herm, 1e-8) << family_name(spec);
    }
}

TEST(CharFn, DensityOperatorMatchesPure) {
    FockVector psi = build_state(CatCode{2, 1.3, 1, 0.0, 0.0}, 50);
    PhaseGrid g = PhaseGrid::make(5.0, 31);
    CharFn a = char_fn(psi, g);
    CharFn b = char_fn(DensityOperator::pure(psi), g);
    EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_THROW(char_fn(psi, PhaseGrid::make(15.0, 31)), GuardBandError);
}

TEST(PolarExpansion, MatchesExactEvaluation) {
    for (const auto &spec : catalog()) {
        FockVector psi = build_state_auto(spec);
        PhaseGrid g = PhaseGrid::make(7.0, 37);
        if (g.half_extent > 2.0 * std::sqrt(psi.dim())) continue;
        CharFn exact = char_fn(psi, g);
        PolarExpansion pe(psi, PolarExpansion::Kind::Characteristic);
        WignerFn wexact = wigner_fn(psi, g);
        PolarExpansion pw(psi, PolarExpansion::Kind::Wigner);
        double dc = 0.0, dw = 0.0;
        for (int i = 0; i < g.points; ++i) {
            for (int j = 0; j < g.points; ++j) {
                dc = std::max(dc, std::abs(pe(g.coord(i), g.coord(j)) - exact.values(i, j)));
                dw = std::max(dw, std::abs(pw(g.coord(i), g.coord(j)).real() - wexact.values(i, j)));
            }
        }
        EXPECT_LT(dc, 1e-8) << family_name(spec);
        EXPECT_LT(dw, 1e-8) << family_name(spec);
    }
}

TEST(Wigner, MatchesPositionSpaceIntegral) {
    FockVector psi = build_state(Pass{3, 0.0, {0.3, 0.2}, 0.0}, 60);
    PolarExpansion pw(psi, PolarExpansion::Kind::Wigner);
    for (auto [x, p] : {std::pair{0.0, 0.0}, {0.7, -1.1}, {-1.9, 0.4}, {2.2, 2.0}}) {
        EXPECT_NEAR(pw(x, p).real(), position_wigner(psi, x, p), 1e-8) << x << "," << p;
    }
}

TEST(Wigner, VacuumAndSinglePhotonFromChar) {
    PhaseGrid g = PhaseGrid::make(10.0, 201);
    WignerFn w0 = wigner_from_char(char_fn(FockVector::vacuum(40), g));
    EXPECT_FALSE(w0.aliased);
    EXPECT_LT(w0.imag_residue, 1e-6);
    double err = 0.0;
    for (int i = 0; i < g.points; ++i) {
        for (int j = 0; j < g.points; ++j) {
            double q = g.coord(i), p = g.coord(j);
            err = std::max(err, std::abs(w0.values(i, j) - std::exp(-q * q - p * p) / kPi));
        }
    }
    EXPECT_LT(err, 1e-6);
    EXPECT_NEAR(integrate(w0), 1.0, 2e-3);
    WignerFn w1 = wigner_from_char(char_fn(FockVector::basis(40, 1), g));
    EXPECT_NEAR(w1.values(100, 100), -1.0 / kPi, 1e-6);
}

TEST(Wigner, AliasingFlag) {
    WignerFn w = wigner_from_char(char_fn(FockVector::vacuum(40), PhaseGrid::make(10.0, 21)));
    EXPECT_TRUE(w.aliased);
}

TEST(Wigner, EvenCatPeaksAndFringes) {
    FockVector cat = build_state(CatCode{1, 2.0, 0, 0.0, 0.0}, 80);
    PolarExpansion pw(cat, PolarExpansion::Kind::Wigner);
    const double q0 = 2.0 * std::numbers::sqrt2;
    EXPECT_GT(pw(q0, 0.0).real(), 0.1);
    EXPECT_GT(pw(-q0, 0.0).real(), 0.1);
    EXPECT_NEAR(pw(0.0, 0.0).real(), 1.0 / kPi, 1e-9);
    // on q = 0 only the interference term survives:
    // W(0,p) = (e^{-8-p^2} + e^{-p^2} cos(4 sqrt2 p)) / (pi (1 + e^{-8}))
    for (double p : {0.0, 0.28, 0.55, 0.9, 1.7}) {
        double expect = (std::exp(-8.0 - p * p) + std::exp(-p * p) * std::cos(4.0 * std::numbers::sqrt2 * p)) /
                        (kPi * (1.0 + std::exp(-8.0)));
        EXPECT_NEAR(pw(0.0, p).real(), expect, 1e-9) << p;
    }
    EXPECT_LT(pw(0.0, kPi / (4.0 * std::numbers::sqrt2)).real(), -0.2);
}

TEST(Wigner, RoundTrip) {
    FockVector psi = build_state(CatCode{2, 1.5, 0, 0.0, 0.0}, 60);
    PhaseGrid g = PhaseGrid::make(12.0, 193);
    CharFn cf = char_fn(psi, g);
    CharFn back = char_from_wigner(wigner_from_char(cf));
    EXPECT_LT((back.values - cf.values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Negativity, ReferenceValues) {
    EXPECT_NEAR(wigner_log_negativity(FockVector::vacuum(20)), 0.0, 1e-6);
    EXPECT_NEAR(wigner_log_negativity(FockVector::basis(20, 1)), std::log(4.0 * std::exp(-0.5) - 1.0), 2e-4);
    EXPECT_NEAR(wigner_log_negativity(build_state(SqueezedCoherent{{0.5, 0.5}, 0.6, 0.3}, 80)), 0.0, 2e-3);
    EXPECT_GT(wigner_log_negativity(build_state(CatCode{2, 2.0, 0, 0.0, 0.0}, 80)), 0.1);
}

TEST(Negativity, RotationInvariance) {
    FockVector psi = build_state(Pass{-2, 0.0, 0.6, 0.0}, 80);
    const double m0 = wigner_log_negativity(psi);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    for (int i = 0; i < 3; ++i) {
        FockVector rot = phase_rotation_op(u(rng), 80) * psi;
        EXPECT_NEAR(wigner_log_negativity(rot), m0, 2e-3);
    }
}

TEST(Negativity, DefaultGridNormalization) {
    for (const auto &spec : catalog()) {
        FockVector psi = build_state_auto(spec);
        PolarExpansion pw(psi, PolarExpansion::Kind::Wigner);
        WignerFn w = wigner_fn(pw, default_grid(psi, displacement_scale(spec)));
        EXPECT_NEAR(integrate(w), 1.0, 2e-3) << family_name(spec);
    }
}

TEST(Negativity, MatchTriplicityBracket) {
    EXPECT_THROW(match_triplicity(0.04, 0.0, 0.1, 0.1), BracketError);
    EXPECT_THROW(match_triplicity(0.04, 0.0, 0.1, 0.15), BracketError);
}

TEST(Export, BinaryRoundTripAndCsv) {
    FockVector psi = build_state(BinomialCode{2, 2, 1}, 30);
    PhaseGrid g = PhaseGrid::make(4.0, 9);
    WignerFn w = wigner_fn(psi, g);
    CharFn cf = char_fn(psi, g);
    std::stringstream sw, sc;
    write_binary(sw, w);
    write_binary(sc, cf);
    WignerFn w2 = read_binary_wigner(sw);
    CharFn c2 = read_binary_char(sc);
    EXPECT_EQ(w2.grid.points, 9);
    EXPECT_EQ((w2.values - w.values).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((c2.values - cf.values).cwiseAbs().maxCoeff(), 0.0);
    std::stringstream bad("nonsense");
    EXPECT_THROW(read_binary_wigner(bad), InvalidSpec);
    std::stringstream csv;
    write_csv(csv, w);
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "q,p,value");
    int lines = 0;
    for (std::string l; std::getline(csv, l);) ++lines;
    EXPECT_EQ(lines, 81);
}
