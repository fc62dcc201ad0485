// Copyright 2026 The Geopid Authors.
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

#ifndef GEOPID_ERROR_H_
#define GEOPID_ERROR_H_

#include <stdexcept>
#include <string>

namespace geopid {

enum class ErrorCode {
  kInvalidArgument,
  kDecode,
  kCapacity,
  kConflict,
  kTrainingFailure,
  kIo,
  kFormat,
};

const char* ErrorCodeName(ErrorCode code);

// Every module reports failures through this one exception type; the code
// lets the CLI map failures onto distinct exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Throw(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Throw(ErrorCode::kInvalidArgument, message);
}

}  // namespace geopid

#endif  // GEOPID_ERROR_H_
