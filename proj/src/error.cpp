// Copyright 2026 The treedet Authors
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

#include "treedet/error.hpp"

namespace treedet {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::non_invertible: return "non_invertible";
    case Errc::parse_error: return "parse_error";
    case Errc::bad_magic: return "bad_magic";
    case Errc::unsupported_shape: return "unsupported_shape";
    case Errc::truncated: return "truncated";
    case Errc::record_mismatch: return "record_mismatch";
    case Errc::schema: return "schema";
    case Errc::io: return "io";
    case Errc::protocol: return "protocol";
    case Errc::connection: return "connection";
  }
  return "unknown";
}

}  // namespace treedet
