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

#include <stdexcept>
#include <string>

namespace cvconv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed state specification, config key, or out-of-range parameter.
class InvalidSpec : public Error {
  public:
    using Error::Error;
};

class InvalidDimension : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

/// The Fock truncation is too small for the requested state or grid.
class TruncationError : public Error {
  public:
    using Error::Error;
};

/// A phase-space grid reaches displacements the truncation cannot represent.
class GuardBandError : public TruncationError {
  public:
    using TruncationError::TruncationError;
};

/// Root finding was given an interval without a sign change.
class BracketError : public Error {
  public:
    using Error::Error;
};

/// The channel violates the complete-positivity constraint.
class RejectedChannel : public Error {
  public:
    using Error::Error;
};

/// The phase-space overlap normalization is inconsistent across states.
class ConventionError : public Error {
  public:
    using Error::Error;
};

}  // namespace cvconv
