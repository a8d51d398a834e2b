/**
 * Copyright 2026 The SonicForge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef SONICFORGE_ERRORS_HPP
#define SONICFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sonicforge {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (bad OBJ/WAV/JSON syntax, truncated data).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent configuration (materials, filter setups).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Source/receiver placement that the scene cannot support.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// No navigable path between the requested endpoints.
class UnreachableError : public PlacementError {
 public:
  using PlacementError::PlacementError;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input data set too small or inconsistent for the requested plan.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Feature is recognized but deliberately not implemented.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure, carries the offending path in the message.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sonicforge

#endif  // SONICFORGE_ERRORS_HPP
