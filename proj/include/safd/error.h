// Copyright 2026 The SAFD Authors.
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
#include <string_view>

namespace safd {

enum class ErrorKind {
  kRange,
  kShape,
  kDegenerateAnnotation,
  kAnnotation,
  kParameter,
  kConfig,
  kNumeric,
  kState,
  kInput,
  kDimension,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

// All library failures are reported through this exception. The kind is the
// one-word diagnostic category the CLI prints.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace safd
