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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "treedet/detpost.hpp"

namespace treedet {

inline constexpr int kProtocolVersion = 1;

struct InferRequest {
  int protocol = kProtocolVersion;
  std::string tile_id;
  std::vector<std::uint8_t> png;
  double min_confidence = 0.9;
  int max_instances = 100;
};

/// Single-line JSON, no trailing newline.
std::string encode_request(const InferRequest& req);
InferRequest decode_request(std::string_view line);

std::string encode_response(const std::string& tile_id, const std::vector<Detection>& dets,
                            int protocol = kProtocolVersion);
std::string encode_error_response(const std::string& tile_id, const std::string& message,
                                  int protocol = kProtocolVersion);

/// Validates a response line. Throws Errc::protocol on version mismatch,
/// adapter-reported errors or a tile_id that does not echo the request, and
/// Errc::schema on malformed detections.
std::vector<Detection> decode_response(std::string_view line, const std::string& expected_tile_id);

/// One request/response exchange over some channel to the adapter.
class AdapterTransport {
 public:
  virtual ~AdapterTransport() = default;
  /// Sends one request line and returns the adapter's reply line. Throws
  /// Errc::connection when the channel fails.
  virtual std::string exchange(const std::string& request_line) = 0;
};

/// Endpoints: "stdio:<shell command>" spawns the adapter and frames one JSON
/// object per line over its stdin/stdout; "http://host:port[/path]" POSTs
/// each request to /infer (or the given path).
std::unique_ptr<AdapterTransport> connect_adapter(const std::string& endpoint);

}  // namespace treedet
