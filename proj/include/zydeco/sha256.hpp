/*
 *  Copyright 2026 The zydeco-sort Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace zydeco {

/// SHA-256 of a byte span, lowercase hex.
std::string sha256_hex(std::span<const std::uint8_t> data);

/// SHA-256 of a string's bytes, lowercase hex.
std::string sha256_hex(const std::string& data);

/// SHA-256 of a file's contents, lowercase hex. Throws io_error.
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace zydeco
