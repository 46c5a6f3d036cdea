// Copyright 2026 The ser-forge Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace ser {

// Root of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument values (non-finite samples, unknown labels, zero counts).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A configuration that cannot be honoured (unknown version, even kernel).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InvalidShape : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant (e.g. a cycle in the computation record).
class InternalError : public Error {
 public:
  using Error::Error;
};

// File-format errors. Each failure mode has its own type so callers and
// tests can tell them apart.
class FormatError : public Error {
 public:
  using Error::Error;
};
class UnsupportedCodec : public FormatError {
 public:
  using FormatError::FormatError;
};
class UnsupportedChannelCount : public FormatError {
 public:
  using FormatError::FormatError;
};
class TruncatedData : public FormatError {
 public:
  using FormatError::FormatError;
};
class BadMagic : public FormatError {
 public:
  using FormatError::FormatError;
};
class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

// Manifest rows that fail validation; the message names the row.
class ManifestError : public Error {
 public:
  using Error::Error;
};

// Checkpoint does not match the requested model configuration.
class IncompatibleCheckpoint : public Error {
 public:
  using Error::Error;
};

// Train/test utterance overlap detected while assembling a dataset.
class LeakageError : public Error {
 public:
  using Error::Error;
};

}  // namespace ser
