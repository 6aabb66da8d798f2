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

#include <string>

#include <json.hpp>

#include "cvconv/channel.hpp"
#include "cvconv/optim.hpp"
#include "cvconv/statelib.hpp"

namespace cvconv {

using Json = nlohmann::ordered_json;

/// {"family": "cat", "N": 2, "alpha": 2, ...}; keys as in the state record.
Json spec_to_json(const StateSpec &spec);

/// Accepts the same keys as parse_record, including the *_db forms.
StateSpec spec_from_json(const Json &j);

/// {"x00": .., "x01": .., "x10": .., "x11": .., "y00": .., "y01": .., "y11": .., "l0": .., "l1": ..}
Json channel_to_json(const GaussianChannel &ch);
GaussianChannel channel_from_json(const Json &j);

Json result_to_json(const ConversionResult &r);
ConversionResult result_from_json(const Json &j);

/// Header and row of the flat CSV summary; the row has no trailing newline.
std::string result_csv_header();
std::string result_csv_row(const ConversionResult &r);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace cvconv
