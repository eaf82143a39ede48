// Copyright 2026 The MapsTP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MAPSTP__ERRORS_HPP_
#define MAPSTP__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mapstp
{

/// Root of every error raised by the library. The CLI maps subclasses onto
/// stable exit codes (1 usage, 2 data, 3 numeric fault).
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or violated precondition on an argument.
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Tensor extents that do not agree.
class ShapeError : public Error
{
public:
  using Error::Error;
};

/// NaN or Inf produced by a forward pass.
class NumericFault : public Error
{
public:
  using Error::Error;
};

/// Malformed or truncated file content.
class ParseError : public Error
{
public:
  using Error::Error;
};

/// Input data that cannot be used (empty scene, empty dataset, bad index, ...).
class DataError : public Error
{
public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error
{
public:
  using Error::Error;
};

}  // namespace mapstp

#endif  // MAPSTP__ERRORS_HPP_
