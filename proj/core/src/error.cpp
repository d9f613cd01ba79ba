// Copyright 2026 The sloscale Authors
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

#include "sloscale/error.hpp"

namespace sloscale {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigNotFound:
      return "CONFIG_NOT_FOUND";
    case ErrorCode::kConfigInvalid:
      return "CONFIG_INVALID";
    case ErrorCode::kInvalidArgument:
      return "INVALID_ARGUMENT";
    case ErrorCode::kInfeasible:
      return "INFEASIBLE";
    case ErrorCode::kPlacementInfeasible:
      return "PLACEMENT_INFEASIBLE";
    case ErrorCode::kShapeMismatch:
      return "SHAPE_MISMATCH";
    case ErrorCode::kTooFewSamples:
      return "TOO_FEW_SAMPLES";
    case ErrorCode::kNumericFailure:
      return "NUMERIC_FAILURE";
    case ErrorCode::kIo:
      return "IO_ERROR";
  }
  return "UNKNOWN";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigNotFound:
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kTooFewSamples:
    case ErrorCode::kIo:
      return 2;
    case ErrorCode::kInfeasible:
    case ErrorCode::kPlacementInfeasible:
      return 3;
    case ErrorCode::kNumericFailure:
      return 4;
  }
  return 1;
}

}  // namespace sloscale
