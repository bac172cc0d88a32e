// Copyright 2026 The insa-codec Authors
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

#ifndef INSA_ERROR_HPP_
#define INSA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace insa {

// Bad user input: missing files, malformed config, unsupported media.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bitstream or weights file that cannot be trusted.
class StreamError : public std::runtime_error {
 public:
  enum class Code { kBadMagic, kUnsupportedVersion, kCrcMismatch, kTruncated, kMalformed };

  StreamError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Evaluation requested outside the domain where it is defined
// (e.g. BD-rate on curves that do not overlap).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace insa

#endif  // INSA_ERROR_HPP_
