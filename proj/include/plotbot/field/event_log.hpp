// Copyright 2026 The plotbot Authors
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
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace plotbot::field {

// On-disk layout:
//   header  : 8-byte magic "PLOTLOG1", u32 little-endian format version
//   record  : u32 payload length, u32 CRC-32 of payload, payload (compact JSON)
// Every payload carries a "seq" field, strictly increasing from 1.
inline constexpr std::string_view kLogMagic = "PLOTLOG1";
inline constexpr std::uint32_t kLogVersion = 1;
inline constexpr std::size_t kLogHeaderSize = 12;
inline constexpr std::uint32_t kMaxRecordBytes = 64U << 20;

struct LogContents {
  std::vector<nlohmann::json> records;
  std::size_t valid_bytes = 0;  // header plus all intact records
  std::int64_t last_valid_seq = 0;
  std::optional<std::string> problem;  // set when the tail is torn or damaged

  bool intact() const { return !problem.has_value(); }
};

// Decodes as many intact records as possible. Never throws on damaged
// tails; a bad header is reported through `problem` with no records.
LogContents parse_log(std::string_view bytes);
LogContents read_log_file(const std::filesystem::path& path);

// Throws Error(kCorruptLog) with details {last_valid_id, valid_bytes}
// unless the contents are intact.
void require_intact(const LogContents& contents);

// Debug export, one record per line.
void export_jsonl(const LogContents& contents, std::ostream& out);

class EventLog {
 public:
  // In-memory log; bytes() holds the encoded image.
  EventLog();
  // File-backed log. An existing file is validated and appended to; a torn
  // tail raises CorruptLog. `truncate` starts a fresh file.
  static EventLog open(const std::filesystem::path& path, bool truncate = false);
  // In-memory log continuing from an encoded image. Throws CorruptLog
  // unless the image is intact.
  static EventLog from_bytes(std::string bytes);

  EventLog(EventLog&&) noexcept = default;
  EventLog& operator=(EventLog&&) noexcept = default;

  // Stamps record["seq"] and appends. Returns the seq.
  std::int64_t append(nlohmann::json record);

  std::int64_t last_seq() const { return last_seq_; }
  std::size_t record_count() const { return count_; }
  // Encoded image, empty for file-backed logs.
  const std::string& bytes() const { return bytes_; }
  // Byte offset just past each record (in-memory logs only).
  const std::vector<std::size_t>& boundaries() const { return boundaries_; }
  bool file_backed() const { return file_.has_value(); }

 private:
  std::string bytes_;
  std::optional<std::ofstream> file_;
  std::vector<std::size_t> boundaries_;
  std::int64_t last_seq_ = 0;
  std::size_t count_ = 0;
  std::size_t size_ = 0;
};

std::string encode_log_header();
std::string encode_log_record(const nlohmann::json& record);

}  // namespace plotbot::field
