// Copyright 2026 The usbench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef USBENCH_ERRORS_HPP_
#define USBENCH_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace usbench {

// Base of every error the library raises on bad input data. The CLI maps
// these to exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document (syntax or schema). Message carries the location.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Dangling or duplicate identifier.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Well-formed value outside its allowed range (NaN score, bad grid choice).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Argument outside an operation's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Degenerate box geometry in a source annotation.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration (unknown split, missing IoU override, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace usbench

#endif  // USBENCH_ERRORS_HPP_
