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

#include <algorithm>

#include <gtest/gtest.h>

#include "cvconv/errors.hpp"
#include "cvconv/io.hpp"

using namespace cvconv;

TEST(Io, SpecJsonRoundTripsEveryFamily) {
    const std::vector<StateSpec> specs = {
        SqueezedCoherent{cplx(0.1, -0.3), 0.25, 0.5}, CatCode{2, cplx(2.0, 0.5), 1, 0.1, 0.2}, BinomialCode{3, 4, 1},
        Pass{-3, cplx(0.0), cplx(0.7, 0.1), 0.3},     CubicPhase{0.05, -0.5756},            Trisqueezed{cplx(0.1, 0.02)},
        Gkp{0.4467, 1, 7},                             FockBasis{5},
    };
    for (const auto &s : specs) {
        const Json j = spec_to_json(s);
        EXPECT_EQ(to_record(spec_from_json(j)), to_record(s)) << j.dump();
        EXPECT_EQ(to_record(spec_from_json(Json::parse(j.dump()))), to_record(s));
    }
}

TEST(Io, SpecJsonAcceptsDecibelKeysAndRejectsJunk) {
    const StateSpec g = spec_from_json(Json::parse(R"({"family": "gkp", "db": 7, "mu": 0})"));
    EXPECT_NEAR(std::get<Gkp>(g).delta, std::pow(10.0, -7.0 / 20.0), 1e-12);
    EXPECT_THROW(spec_from_json(Json::parse(R"({"family": "cat", "beta": 1})")), InvalidSpec);
    EXPECT_THROW(spec_from_json(Json::parse(R"({"family": "cat", "N": [1]})")), InvalidSpec);
    EXPECT_THROW(spec_from_json(Json::parse(R"([1, 2])")), InvalidSpec);
    EXPECT_THROW(spec_from_json(Json::parse(R"({"family": "cat", "N": 1.5})")), InvalidSpec);
}

TEST(Io, ChannelJsonRoundTrip) {
    GaussianChannel ch;
    ch.X << 0.1, -0.2, 0.3, 1.7;
    ch.Y << 0.5, 0.01, 0.01, 0.25;
    ch.l << -1.0, 2.0 / 3.0;
    const GaussianChannel back = channel_from_json(Json::parse(channel_to_json(ch).dump()));
    EXPECT_EQ(back.X, ch.X);
    EXPECT_EQ(back.Y, ch.Y);
    EXPECT_EQ(back.l, ch.l);
    Json bad = channel_to_json(ch);
    bad.erase("l1");
    EXPECT_THROW(channel_from_json(bad), InvalidSpec);
    bad = channel_to_json(ch);
    bad["extra"] = 1.0;
    EXPECT_THROW(channel_from_json(bad), InvalidSpec);
}

TEST(Io, ResultJsonRoundTrip) {
    ConversionResult r;
    r.input = Pass{-2, cplx(0.0), cplx(0.3454), 0.0};
    r.target = CatCode{2, cplx(1.0), 0, 0.0, 0.0};
    r.family = ChannelFamily::SymplecticPlusDisplacement;
    r.best_params = {0.1, 0.2, 0.3, 0.4, 0.5};
    r.best_channel = decode(r.family, r.best_params);
    r.fidelity_init = 0.671;
    r.fidelity_best = 0.1 + 0.2;
    r.trace = {0.671, 0.8, 0.1 + 0.2};
    r.seed = 18446744073709551557ULL;
    r.restarts = 3;
    r.evaluations = 1234;
    r.input_dim = 120;
    r.target_dim = 160;
    r.grid = PhaseGrid::make(8.0, 129);
    const Json j = result_to_json(r);
    const ConversionResult b = result_from_json(Json::parse(j.dump()));
    EXPECT_EQ(result_to_json(b).dump(), j.dump());
    EXPECT_EQ(b.fidelity_best, r.fidelity_best);
    EXPECT_EQ(b.seed, r.seed);
    EXPECT_EQ(b.grid->points, 129);

    ConversionResult failed;
    failed.error = "bad spec";
    const ConversionResult fb = result_from_json(result_to_json(failed));
    EXPECT_FALSE(fb.ok());
    EXPECT_EQ(fb.error, "bad spec");
    EXPECT_THROW(result_from_json(Json::parse(R"({"input": {}})")), InvalidSpec);
}

TEST(Io, CsvRowsMatchHeaderWidth) {
    auto columns = [](const std::string &s) {
        int n = 1;
        bool quoted = false;
        for (char c : s) {
            if (c == '"') quoted = !quoted;
            else if (c == ',' && !quoted) ++n;
        }
        return n;
    };
    ConversionResult r;
    r.input = CatCode{2, cplx(2.0), 0, 0.0, 0.0};
    r.target = BinomialCode{2, 2, 0};
    r.trace = {0.5};
    EXPECT_EQ(columns(result_csv_row(r)), columns(result_csv_header()));
    r.error = "oops, with comma";
    EXPECT_EQ(columns(result_csv_row(r)), columns(result_csv_header()));
    EXPECT_NE(result_csv_row(r).find("\"oops, with comma\""), std::string::npos);
}
