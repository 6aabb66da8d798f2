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

#include <gtest/gtest.h>

#include "cvconv/channel.hpp"
#include "cvconv/errors.hpp"

using namespace cvconv;

namespace {

constexpr double kPi = std::numbers::pi;

// Pure-loss Kraus map A_k = sum_n sqrt(C(n,k)) eta^{(n-k)/2} (1-eta)^{k/2} |n-k><n|.
Eigen::MatrixXcd kraus_loss(const Eigen::MatrixXcd &rho, double eta) {
    const int d = static_cast<int>(rho.rows());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
        for (int n = k; n < d; ++n) {
            const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
            a(n - k, n) = std::exp(0.5 * lc + 0.5 * (n - k) * std::log(eta) + 0.5 * k * std::log1p(-eta));
        }
        out += a.cast<cplx>() * rho * a.transpose().cast<cplx>();
    }
    return out;
}

GaussianChannel loss(double eta) {
    GaussianChannel ch;
    ch.X = std::sqrt(eta) * Mat2::Identity();
    ch.Y = (1.0 - eta) * Mat2::Identity();
    return ch;
}

ChiEvaluator polar_chi(const PolarExpansion &p) {
    return [&p](double x, double y) { return p(x, y); };
}

Mat2 random_symplectic(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    Mat2 m;
    m << u(rng), u(rng), u(rng), u(rng);
    while (std::abs(m.determinant()) < 0.05) m(0, 0) += 0.3;
    const double d = m.determinant();
    if (d < 0) m.col(0) = -m.col(0);
    return m / std::sqrt(std::abs(d));
}

}  // namespace

TEST(Channel, LossMatchesKrausOnCat) {
    const FockVector cat = build_state(CatCode{2, cplx(1.5, 0.5), 0, 0.0, 0.0}, 60);
    const Eigen::MatrixXcd rho = DensityOperator::pure(cat).matrix();
    const DensityOperator out(kraus_loss(rho, 0.5));
    const PolarExpansion pin(cat, PolarExpansion::Kind::Characteristic);
    const ChiEvaluator mapped = apply_channel(polar_chi(pin), loss(0.5));
    const CharFn oracle = char_fn(out, PhaseGrid::make(4.0, 17));
    for (int i = 0; i < 17; ++i) {
        for (int j = 0; j < 17; ++j) {
            const cplx v = mapped(oracle.grid.coord(i), oracle.grid.coord(j));
            EXPECT_LT(std::abs(v - oracle.values(i, j)), 1e-8) << i << "," << j;
        }
    }
}

TEST(Channel, LossOnCoherentIsCoherent) {
    const cplx alpha(1.2, -0.7);
    const PolarExpansion pin(build_state(SqueezedCoherent{alpha, 0.0, 0.0}, 60), PolarExpansion::Kind::Characteristic);
    const ChiEvaluator mapped = apply_channel(polar_chi(pin), loss(0.5));
    const cplx beta = alpha * std::sqrt(0.5);
    for (double x : {-2.0, 0.3, 1.7}) {
        for (double y : {-1.1, 0.0, 2.4}) {
            // coherent chi: e^{-|r|^2/4} e^{i sqrt2 (y Re b - x Im b)}
            const cplx ref =
                std::exp(-(x * x + y * y) / 4.0) * std::polar(1.0, std::sqrt(2.0) * (y * beta.real() - x * beta.imag()));
            EXPECT_LT(std::abs(mapped(x, y) - ref), 1e-9);
        }
    }
}

TEST(Channel, CompositionMatchesSequentialApplication) {
    const PolarExpansion pin(build_state(CatCode{3, cplx(1.3), 1, 0.0, 0.0}, 60), PolarExpansion::Kind::Characteristic);
    GaussianChannel a = loss(0.7);
    a.l = Vec2(0.4, -0.3);
    GaussianChannel b;
    b.X << 1.3, 0.2, -0.1, 1.0 / 1.3 + 0.2 * 0.1 / 1.3;
    b.Y << 0.3, 0.05, 0.05, 0.2;
    b.l = Vec2(-0.2, 0.5);
    ASSERT_TRUE(is_cp(b).cp);
    const ChiEvaluator seq = apply_channel(apply_channel(polar_chi(pin), a), b);
    const ChiEvaluator one = apply_channel(polar_chi(pin), compose(a, b));
    for (double x : {-1.5, 0.2, 1.1}) {
        for (double y : {-0.8, 0.6, 2.0}) EXPECT_LT(std::abs(seq(x, y) - one(x, y)), 1e-12);
    }
}

TEST(Channel, DisplacementOnlyMovesVacuumToCoherent) {
    GaussianChannel ch;
    ch.l = Vec2(1.1, -0.6);
    const PolarExpansion vac(FockVector::vacuum(4), PolarExpansion::Kind::Characteristic);
    const ChiEvaluator mapped = apply_channel(polar_chi(vac), ch);
    // mean (q, p) = l, alpha = (q + i p) / sqrt2
    const cplx alpha = cplx(1.1, -0.6) / std::sqrt(2.0);
    const CharFn oracle = char_fn(build_state(SqueezedCoherent{alpha, 0.0, 0.0}, 60), PhaseGrid::make(3.0, 13));
    for (int i = 0; i < 13; ++i) {
        for (int j = 0; j < 13; ++j) {
            EXPECT_LT(std::abs(mapped(oracle.grid.coord(i), oracle.grid.coord(j)) - oracle.values(i, j)), 1e-10);
        }
    }
}

TEST(Channel, CalibrationIsConsistent) {
    const Calibration &c = calibration();
    EXPECT_NEAR(c.kappa, 1.0 / (2.0 * kPi), 1e-10);
    EXPECT_EQ(c.checks.size(), 5u);
    EXPECT_LT(c.max_deviation, 1e-4);
}

TEST(Channel, IdentityFidelityMatchesOverlap) {
    const std::vector<std::pair<StateSpec, StateSpec>> pairs = {
        {CatCode{2, cplx(2.0), 0, 0.0, 0.0}, BinomialCode{2, 2, 0}},
        {SqueezedCoherent{cplx(0.5, 0.2), 0.3, 0.1}, FockBasis{1}},
        {Pass{-2, cplx(0.0, 2.0), cplx(0.7), 0.0}, CatCode{2, cplx(0.0, 2.0), 0, 0.0, 0.0}},
        {Trisqueezed{cplx(0.1)}, CatCode{3, cplx(1.5), 0, 0.0, 0.0}},
        {CubicPhase{0.1, -0.5756}, Gkp{0.4467, 0, 0}},
        {Gkp{0.5, 1, 0}, CatCode{1, cplx(1.0), 0, 0.0, 0.0}},
        {CatCode{2, cplx(2.0), 0, 0.0, 0.0}, CatCode{2, cplx(2.0), 0, 0.0, 0.0}},
    };
    for (const auto &[a, b] : pairs) {
        const FockVector u = build_state_auto(a), v = build_state_auto(b);
        const FidelityEvaluator ev(u, v);
        const int d = std::min(u.dim(), v.dim());
        const double ref = std::norm(u.amps().head(d).dot(v.amps().head(d)));
        EXPECT_NEAR(ev(GaussianChannel::identity()), ref, 1e-6) << to_record(a) << " -> " << to_record(b);
    }
}

TEST(Channel, SqueezeFidelityMatchesClosedForm) {
    const FockVector vac = FockVector::vacuum(4);
    const FockVector target = squeezed_vacuum(cplx(0.8), 120);
    const FidelityEvaluator ev(vac, target);
    for (double xi : {-0.5, 0.0, 0.4, 0.8, 1.5}) {
        const double f = ev(decode(ChannelFamily::SqueezeOnly, std::vector<double>{xi}));
        EXPECT_NEAR(f, 1.0 / std::cosh(0.8 - xi), 1e-7) << xi;
    }
}

TEST(Channel, LossFidelityMatchesKraus) {
    const FockVector cat = build_state(CatCode{2, cplx(2.0), 0, 0.0, 0.0}, 60);
    const Eigen::MatrixXcd out = kraus_loss(DensityOperator::pure(cat).matrix(), 0.8);
    const double ref = (cat.amps().adjoint() * out * cat.amps())(0, 0).real();
    const FidelityEvaluator ev(cat, cat);
    EXPECT_NEAR(ev(loss(0.8)), ref, 1e-7);
}

TEST(Channel, FixedGridAgreesWithAdaptiveLattice) {
    const FockVector u = build_state_auto(CatCode{2, cplx(2.0), 0, 0.0, 0.0});
    const FockVector v = build_state_auto(Pass{-2, cplx(0.0, 2.0), cplx(0.7), 0.0});
    const FidelityEvaluator ev(u, v);
    GaussianChannel ch = decode(ChannelFamily::SqueezeOnly, std::vector<double>{-0.3});
    ch.Y = 0.1 * Mat2::Identity();
    ASSERT_TRUE(is_cp(ch).cp);
    EXPECT_NEAR(ev.on_grid(ch, PhaseGrid::make(14.0, 281)), ev(ch), 1e-6);
}

TEST(Channel, SymplecticMatricesAreCp) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const Mat2 s = random_symplectic(rng);
        ASSERT_NEAR(s.determinant(), 1.0, 1e-12);
        EXPECT_TRUE(is_cp(s, Mat2::Zero()).cp);
        EXPECT_TRUE(is_cp_det_form(s, Mat2::Zero()));
    }
}

TEST(Channel, NonSymplecticWithoutNoiseIsRejected) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> scale(0.1, 0.9);
    for (int i = 0; i < 1000; ++i) {
        const double k = (i % 2) ? 1.0 + scale(rng) : scale(rng);
        const Mat2 x = std::sqrt(k) * random_symplectic(rng);
        EXPECT_FALSE(is_cp(x, Mat2::Zero()).cp);
        EXPECT_FALSE(is_cp_det_form(x, Mat2::Zero()));
    }
}

TEST(Channel, EigenvalueAndDeterminantFormsAgree) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int agree = 0, total = 0;
    for (int i = 0; i < 1000; ++i) {
        Mat2 x, y;
        x << u(rng), u(rng), u(rng), u(rng);
        const double b = u(rng);
        y << u(rng) + 1.0, b, b, u(rng) + 1.0;
        const CpReport r = is_cp(x, y, 0.0);
        // skip near-boundary draws
        if (std::abs(r.det_slack) < 1e-6 || std::abs(r.min_eig_y) < 1e-6) continue;
        ++total;
        agree += r.cp == is_cp_det_form(x, y, 0.0);
    }
    EXPECT_GT(total, 500);
    EXPECT_EQ(agree, total);
}

TEST(Channel, RepairYieldsCp) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        Mat2 x, y;
        x << u(rng), u(rng), u(rng), u(rng);
        const double b = u(rng);
        y << u(rng), b, b, u(rng);
        const GaussianChannel ch = repair(x, y, Vec2::Zero());
        EXPECT_TRUE(is_cp(ch).cp);
        EXPECT_TRUE(is_cp_det_form(ch.X, ch.Y));
    }
    // already CP input is left alone
    const GaussianChannel l = loss(0.6);
    EXPECT_LT((repair(l.X, l.Y, l.l).Y - l.Y).norm(), 1e-10);
}

TEST(Channel, DecodeIdentityAndBounds) {
    for (auto f : {ChannelFamily::FullCptp, ChannelFamily::SymplecticPlusDisplacement, ChannelFamily::SqueezeOnly}) {
        const GaussianChannel ch = decode(f, identity_parameters(f));
        EXPECT_EQ(ch.X, Mat2::Identity());
        EXPECT_EQ(ch.Y, Mat2::Zero());
        EXPECT_EQ(ch.l, Vec2::Zero());
        EXPECT_EQ(static_cast<int>(default_bounds(f).size()), parameter_count(f));
        EXPECT_EQ(parse_family(family_name(f)), f);

        std::mt19937_64 rng(11);
        const auto bounds = default_bounds(f);
        for (int i = 0; i < 300; ++i) {
            std::vector<double> p;
            for (auto [lo, hi] : bounds) p.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
            EXPECT_TRUE(is_cp(decode(f, p)).cp) << family_name(f);
        }
    }
    EXPECT_THROW(decode(ChannelFamily::SqueezeOnly, std::vector<double>{0.0, 1.0}), InvalidSpec);
    EXPECT_THROW(parse_family("bogus"), InvalidSpec);
}

TEST(Channel, SymplecticFamilyHasUnitDeterminant) {
    const GaussianChannel ch = decode(ChannelFamily::SymplecticPlusDisplacement, std::vector<double>{0.7, -1.2, 2.5, 1.0, -2.0});
    EXPECT_NEAR(ch.X.determinant(), 1.0, 1e-12);
    EXPECT_EQ(ch.l, Vec2(1.0, -2.0));
    const GaussianChannel s = decode(ChannelFamily::SqueezeOnly, std::vector<double>{0.5});
    EXPECT_NEAR(s.X(0, 0), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(s.X(1, 1), std::exp(0.5), 1e-15);
}

TEST(Channel, RejectsInvalidChannels) {
    Mat2 y;
    y << 1.0, 0.2, 0.3, 1.0;
    EXPECT_THROW(is_cp(Mat2::Identity(), y), InvalidSpec);
    GaussianChannel amp;
    amp.X = 1.5 * Mat2::Identity();
    const PolarExpansion vac(FockVector::vacuum(4), PolarExpansion::Kind::Characteristic);
    EXPECT_THROW(apply_channel(polar_chi(vac), amp), RejectedChannel);
    const FidelityEvaluator ev(FockVector::vacuum(4), FockVector::vacuum(4));
    EXPECT_THROW(ev(amp), RejectedChannel);
}

TEST(Channel, FlatRecordRoundTrip) {
    GaussianChannel ch = loss(0.3);
    ch.X(0, 1) = 0.2;
    ch.Y(0, 1) = ch.Y(1, 0) = 0.05;
    ch.l = Vec2(0.1, -0.4);
    const GaussianChannel back = from_flat(to_flat(ch));
    EXPECT_EQ(back.X, ch.X);
    EXPECT_EQ(back.Y, ch.Y);
    EXPECT_EQ(back.l, ch.l);
}

TEST(Channel, CpExamples) {
    EXPECT_TRUE(is_cp(Mat2::Identity(), Mat2::Zero()).cp);
    const CpReport thermal = is_cp(Mat2::Zero(), Mat2::Identity());
    EXPECT_TRUE(thermal.cp);
    EXPECT_NEAR(thermal.min_eig_plus, 0.0, 1e-15);
    EXPECT_NEAR(thermal.det_slack, 0.0, 1e-15);
    const CpReport half = is_cp(0.5 * Mat2::Identity(), Mat2::Zero());
    EXPECT_FALSE(half.cp);
    EXPECT_NEAR(half.det_slack, -0.5625, 1e-15);
    EXPECT_FALSE(is_cp_det_form(0.5 * Mat2::Identity(), Mat2::Zero()));
}

TEST(Channel, TracePreservedAtOrigin) {
    const PolarExpansion pin(build_state(CatCode{2, cplx(2.0), 1, 0.0, 0.0}, 60), PolarExpansion::Kind::Characteristic);
    const ChiEvaluator out = apply_channel(polar_chi(pin), repair((Mat2() << 0.3, 1.2, -0.4, 2.0).finished(),
                                                                  Mat2::Identity(), Vec2(1.0, 2.0)));
    EXPECT_EQ(out(0.0, 0.0), pin(0.0, 0.0));
}
