// Copyright 2026 The mentionlink Authors.
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

#ifndef MLINK_ERRORS_H_
#define MLINK_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mlink {

// Broad error categories. The command-line tool maps these to exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kNotFound,
  kVersionMismatch,
  kParse,
  kValidation,
  kNumerical,
  kInternal,
};

const char *ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &message) {
  throw Error(kind, message);
}

inline void Require(bool condition, const std::string &message) {
  if (!condition) Fail(ErrorKind::kInvalidArgument, message);
}

}  // namespace mlink

#endif  // MLINK_ERRORS_H_
