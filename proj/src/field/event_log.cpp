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

#include "plotbot/field/event_log.hpp"

#include <cstring>
#include <iterator>

#include <fmt/format.h>
#include <zlib.h>

#include "plotbot/error.hpp"

namespace plotbot::field {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(in[at + i])) << (8 * i);
  return v;
}

std::uint32_t crc_of(std::string_view payload) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
}

}  // namespace

std::string encode_log_header() {
  std::string out(kLogMagic);
  put_u32(out, kLogVersion);
  return out;
}

std::string encode_log_record(const nlohmann::json& record) {
  const std::string payload = record.dump();
  std::string out;
  out.reserve(payload.size() + 8);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  put_u32(out, crc_of(payload));
  out += payload;
  return out;
}

LogContents parse_log(std::string_view bytes) {
  LogContents out;
  if (bytes.size() < kLogHeaderSize || bytes.substr(0, kLogMagic.size()) != kLogMagic) {
    out.problem = "missing or damaged log header";
    return out;
  }
  if (const auto v = get_u32(bytes, kLogMagic.size()); v != kLogVersion) {
    out.problem = fmt::format("unsupported log version {}", v);
    return out;
  }
  std::size_t at = kLogHeaderSize;
  out.valid_bytes = at;
  while (at < bytes.size()) {
    if (bytes.size() - at < 8) {
      out.problem = fmt::format("torn record frame at byte {}", at);
      break;
    }
    const auto len = get_u32(bytes, at);
    const auto crc = get_u32(bytes, at + 4);
    if (len > kMaxRecordBytes || bytes.size() - at - 8 < len) {
      out.problem = fmt::format("torn record payload at byte {}", at);
      break;
    }
    const auto payload = bytes.substr(at + 8, len);
    if (crc_of(payload) != crc) {
      out.problem = fmt::format("checksum mismatch at byte {}", at);
      break;
    }
    auto record = nlohmann::json::parse(payload, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("seq")) {
      out.problem = fmt::format("undecodable record at byte {}", at);
      break;
    }
    const auto seq = record["seq"].get<std::int64_t>();
    if (seq <= out.last_valid_seq) {
      out.problem = fmt::format("sequence went backwards at byte {}", at);
      break;
    }
    out.last_valid_seq = seq;
    out.records.push_back(std::move(record));
    at += 8 + len;
    out.valid_bytes = at;
  }
  return out;
}

LogContents read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kCorruptLog, fmt::format("cannot open log {}", path.string()),
                       {{"last_valid_id", 0}, {"valid_bytes", 0}});
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_log(bytes);
}

void require_intact(const LogContents& c) {
  if (c.intact()) return;
  throw Error(ErrorCode::kCorruptLog,
              fmt::format("{}; last valid event id {}", *c.problem, c.last_valid_seq),
              {{"last_valid_id", c.last_valid_seq}, {"valid_bytes", c.valid_bytes}});
}

void export_jsonl(const LogContents& c, std::ostream& out) {
  for (const auto& r : c.records) out << r.dump() << '\n';
  if (c.problem) out << nlohmann::json({{"corrupt_tail", *c.problem}, {"last_valid_id", c.last_valid_seq}}).dump() << '\n';
}

EventLog::EventLog() : bytes_(encode_log_header()), size_(kLogHeaderSize) {}

EventLog EventLog::open(const std::filesystem::path& path, bool truncate) {
  EventLog log;
  log.bytes_.clear();
  if (!truncate && std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    const auto contents = read_log_file(path);
    require_intact(contents);
    log.last_seq_ = contents.last_valid_seq;
    log.size_ = contents.valid_bytes;
    log.count_ = contents.records.size();
    log.file_.emplace(path, std::ios::binary | std::ios::app);
  } else {
    log.file_.emplace(path, std::ios::binary | std::ios::trunc);
    *log.file_ << encode_log_header();
    log.file_->flush();
  }
  if (!*log.file_) throw Error(ErrorCode::kInvalidConfig, fmt::format("cannot write log {}", path.string()));
  return log;
}

EventLog EventLog::from_bytes(std::string bytes) {
  const auto contents = parse_log(bytes);
  require_intact(contents);
  EventLog log;
  log.bytes_ = std::move(bytes);
  log.last_seq_ = contents.last_valid_seq;
  log.count_ = contents.records.size();
  log.size_ = contents.valid_bytes;
  // Boundaries of the inherited records are recomputed from the frames.
  std::size_t at = kLogHeaderSize;
  while (at < log.bytes_.size()) {
    at += 8 + get_u32(log.bytes_, at);
    log.boundaries_.push_back(at);
  }
  return log;
}

std::int64_t EventLog::append(nlohmann::json record) {
  record["seq"] = ++last_seq_;
  const auto frame = encode_log_record(record);
  size_ += frame.size();
  ++count_;
  if (file_) {
    *file_ << frame;
    file_->flush();
  } else {
    bytes_ += frame;
    boundaries_.push_back(bytes_.size());
  }
  return last_seq_;
}

}  // namespace plotbot::field
