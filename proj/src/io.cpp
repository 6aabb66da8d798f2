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

#include "cvconv/io.hpp"

#include <charconv>
#include <sstream>

#include "cvconv/errors.hpp"

namespace cvconv {

namespace {

const char *const kChannelKeys[] = {"x00", "x01", "x10", "x11", "y00", "y01", "y11", "l0", "l1"};

std::string csv_quote(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

double get_number(const Json &j, const char *key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw InvalidSpec(std::string("missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json spec_to_json(const StateSpec &spec) {
    Json j = Json::object();
    std::stringstream ss(to_record(spec));
    std::string item;
    while (std::getline(ss, item, ';')) {
        const auto eq = item.find('=');
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "family") {
            j[key] = val;
            continue;
        }
        double v = 0.0;
        std::from_chars(val.data(), val.data() + val.size(), v);
        if (val.find_first_of(".eEn") == std::string::npos) j[key] = static_cast<long long>(v);
        else j[key] = v;
    }
    return j;
}

StateSpec spec_from_json(const Json &j) {
    if (!j.is_object()) throw InvalidSpec("state spec must be a JSON object");
    std::string rec;
    for (const auto &[key, val] : j.items()) {
        if (key.find_first_of(";=") != std::string::npos) throw InvalidSpec("invalid state key '" + key + "'");
        std::string text;
        if (val.is_string()) text = val.get<std::string>();
        else if (val.is_number_integer()) text = std::to_string(val.get<long long>());
        else if (val.is_number()) text = format_double(val.get<double>());
        else throw InvalidSpec("state field '" + key + "' must be a number or string");
        if (text.find_first_of(";=") != std::string::npos) throw InvalidSpec("invalid value for '" + key + "'");
        if (!rec.empty()) rec += ';';
        rec += key + "=" + text;
    }
    return parse_record(rec);
}

Json channel_to_json(const GaussianChannel &ch) {
    Json j = Json::object();
    const auto flat = to_flat(ch);
    for (int i = 0; i < 9; ++i) j[kChannelKeys[i]] = flat[i];
    return j;
}

GaussianChannel channel_from_json(const Json &j) {
    if (!j.is_object()) throw InvalidSpec("channel must be a JSON object");
    std::vector<double> flat;
    for (const char *k : kChannelKeys) flat.push_back(get_number(j, k));
    if (j.size() != 9) throw InvalidSpec("channel object has unknown keys");
    return from_flat(flat);
}

Json result_to_json(const ConversionResult &r) {
    Json j = Json::object();
    j["input"] = spec_to_json(r.input);
    j["target"] = spec_to_json(r.target);
    j["family"] = family_name(r.family);
    j["seed"] = r.seed;
    j["restarts"] = r.restarts;
    if (r.grid) j["grid"] = {{"mode", "fixed"}, {"half_extent", r.grid->half_extent}, {"points", r.grid->points}};
    else j["grid"] = {{"mode", "adaptive"}};
    if (!r.ok()) {
        j["error"] = r.error;
        return j;
    }
    j["input_dim"] = r.input_dim;
    j["target_dim"] = r.target_dim;
    j["fidelity_init"] = r.fidelity_init;
    j["fidelity_best"] = r.fidelity_best;
    j["best_channel"] = channel_to_json(r.best_channel);
    j["best_params"] = r.best_params;
    j["evaluations"] = r.evaluations;
    j["trace"] = r.trace;
    return j;
}

ConversionResult result_from_json(const Json &j) {
    try {
        ConversionResult r;
        r.input = spec_from_json(j.at("input"));
        r.target = spec_from_json(j.at("target"));
        r.family = parse_family(j.at("family").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        r.restarts = j.at("restarts").get<int>();
        const Json &g = j.at("grid");
        if (g.at("mode") == "fixed") r.grid = PhaseGrid::make(g.at("half_extent").get<double>(), g.at("points").get<int>());
        if (j.contains("error")) {
            r.error = j.at("error").get<std::string>();
            return r;
        }
        r.input_dim = j.at("input_dim").get<int>();
        r.target_dim = j.at("target_dim").get<int>();
        r.fidelity_init = j.at("fidelity_init").get<double>();
        r.fidelity_best = j.at("fidelity_best").get<double>();
        r.best_channel = channel_from_json(j.at("best_channel"));
        r.best_params = j.at("best_params").get<std::vector<double>>();
        r.evaluations = j.at("evaluations").get<long>();
        r.trace = j.at("trace").get<std::vector<double>>();
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidSpec(std::string("malformed result record: ") + e.what());
    }
}

std::string result_csv_header() {
    return "input,target,family,seed,fidelity_init,fidelity_best,x00,x01,x10,x11,y00,y01,y11,l0,l1,iterations,error";
}

std::string result_csv_row(const ConversionResult &r) {
    std::string row = csv_quote(to_record(r.input)) + "," + csv_quote(to_record(r.target)) + "," +
                      family_name(r.family) + "," + std::to_string(r.seed) + ",";
    if (!r.ok()) return row + ",,,,,,,,,,,," + csv_quote(r.error);
    row += format_double(r.fidelity_init) + "," + format_double(r.fidelity_best);
    for (double v : to_flat(r.best_channel)) row += "," + format_double(v);
    row += "," + std::to_string(r.trace.empty() ? 0 : r.trace.size() - 1) + ",";
    return row;
}

}  // namespace cvconv
