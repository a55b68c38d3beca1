// Copyright 2026 The segnas Authors.
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

#ifndef SEGNAS_ERRORS_H_
#define SEGNAS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace segnas {

// Every error raised by the library derives from Error so callers can map
// failure classes to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Genome text or bit layout does not match the declared search space.
class CodecError : public Error {
 public:
  using Error::Error;
};

// An architecture field lies outside its choice set.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Objective values the engine cannot rank (NaN, wrong arity, out of range).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// The table evaluator has no row for the requested genome and fraction.
class MissingEntryError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

// External worker failed: crash, timeout, malformed frame, or handshake.
class TransportError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

// Hypervolume and front-analysis preconditions.
class MetricError : public Error {
 public:
  using Error::Error;
};

// Checkpoint or run archive cannot be read back.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace segnas

#endif  // SEGNAS_ERRORS_H_
