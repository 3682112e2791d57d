// Copyright 2026 The runfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RUNFUZZ_ERROR_HPP_
#define RUNFUZZ_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace runfuzz {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (length mismatch, duplicate
// cluster, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A program document or targets file could not be understood. The message
// names the offending line or field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Lookup of something that does not exist (uncovered target, unknown block).
class LookupError : public Error {
 public:
  using Error::Error;
};

// Writing the corpus, crashes or stats failed; campaigns stop on this.
class PersistenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace runfuzz

#endif  // RUNFUZZ_ERROR_HPP_
