/*
 * Copyright 2026 Fairperm Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace fairperm {

enum class ErrorCode {
  empty_conditioning_class,
  degenerate_variance,
  insufficient_data,
  metric_undefined_on_resample,
  degenerate_data,
  insufficient_trials,
  too_many_splits,
  invalid_scheme,
  invalid_argument,
  missing_column,
  unparsable_value,
  group_not_found,
  empty_group,
};

const char* error_code_name(ErrorCode code);

/// All typed failures thrown by the library. `code()` identifies the
/// contract that was violated; `what()` names the offending location.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fairperm
