// Copyright 2026 The semmix Authors.
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

#ifndef SEMMIX_ERROR_H_
#define SEMMIX_ERROR_H_

#include <stdexcept>
#include <string>

namespace semmix {

// Base of every error thrown by the library. The CLI maps the derived kinds
// onto its exit codes: config -> 1, data -> 2, numeric -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or parameters (bad STFT config, bad model dims...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data problems: missing files, malformed JSON/WAV, failed validation.
class DataError : public Error {
 public:
  using Error::Error;
};

// Mismatched lengths, dimensions or too-short inputs.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// Label space / embedding space / modality mismatch.
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

// Synthesized mix exceeded the peak limit.
class ClippingError : public DataError {
 public:
  using DataError::DataError;
};

// NaN/Inf, zero norms, zero normalization denominators, degenerate masses.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace semmix

#endif  // SEMMIX_ERROR_H_
