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

#include "mlink/errors.h"

namespace mlink {

const char *ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kNotFound: return "not found";
    case ErrorKind::kVersionMismatch: return "version mismatch";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kNumerical: return "numerical error";
    case ErrorKind::kInternal: return "internal error";
  }
  return "unknown";
}

}  // namespace mlink
