#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seedsim/protocol/bytes.hpp"

namespace seedsim::protocol {

enum class ScalarType : std::uint8_t { U8, U16, U32, U64, I8, I16, I32, I64, F32, F64 };

std::size_t scalar_size(ScalarType type) noexcept;
std::string_view to_string(ScalarType type) noexcept;

struct FieldDef {
  std::string name;
  ScalarType type = ScalarType::U8;
  std::size_t count = 1;  // > 1 for fixed arrays
  bool is_array = false;
  std::size_t offset = 0;
  std::optional<double> scale;
  std::string unit;

  std::size_t size() const { return scalar_size(type) * count; }
};

/// Packed little-endian codec for one message definition, fields in declaration order.
class MessageCodec {
 public:
  MessageCodec(std::string name, std::uint16_t id, std::vector<FieldDef> fields);

  const std::string& name() const { return name_; }
  std::uint16_t id() const { return id_; }
  std::size_t size() const { return size_; }
  const std::vector<FieldDef>& fields() const { return fields_; }
  const FieldDef* field(std::string_view name) const;

  /// Missing fields encode as zero. Throws BadLength for values outside the field's range.
  Bytes encode(const nlohmann::json& values) const;
  /// Raw integer/float values keyed by field name. Throws WrongLength.
  nlohmann::json decode(ByteView payload) const;
  /// {field: {"value": raw * scale, "unit": unit}}, one entry per field.
  nlohmann::json normalize(ByteView payload) const;

 private:
  std::string name_;
  std::uint16_t id_;
  std::vector<FieldDef> fields_;
  std::size_t size_ = 0;
};

/// Codecs generated at runtime from a message-definition JSON document.
class CodecSet {
 public:
  /// Throws DuplicateMsgId, UnknownType, or ScenarioError for malformed documents.
  static CodecSet compile(const nlohmann::json& definition);
  static CodecSet load(const std::filesystem::path& file);
  /// The messages.json shipped with the library.
  static CodecSet builtin();
  static std::filesystem::path default_schema_path();

  const MessageCodec& by_id(std::uint16_t id) const;  // throws UnknownMessage
  const MessageCodec& by_name(std::string_view name) const;
  const MessageCodec* find(std::uint16_t id) const;
  const std::vector<MessageCodec>& messages() const { return messages_; }
  std::uint8_t version() const { return version_; }

 private:
  std::vector<MessageCodec> messages_;
  std::map<std::uint16_t, std::size_t> by_id_;
  std::uint8_t version_ = 1;
};

}  // namespace seedsim::protocol
