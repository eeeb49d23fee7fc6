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

// Internal helpers shared by the text parsers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treedet::detail {

std::string_view trim(std::string_view s);
/// Splits on '\n' and strips a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Whole-string decimal parse; rejects trailing garbage and non-finite values.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);
void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace treedet::detail
