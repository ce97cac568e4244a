#include "seedsim/protocol/schema.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <fmt/format.h>

namespace seedsim::protocol {

using nlohmann::json;

std::size_t scalar_size(ScalarType type) noexcept {
  switch (type) {
    case ScalarType::U8:
    case ScalarType::I8: return 1;
    case ScalarType::U16:
    case ScalarType::I16: return 2;
    case ScalarType::U32:
    case ScalarType::I32:
    case ScalarType::F32: return 4;
    case ScalarType::U64:
    case ScalarType::I64:
    case ScalarType::F64: return 8;
  }
  return 0;
}

std::string_view to_string(ScalarType type) noexcept {
  switch (type) {
    case ScalarType::U8: return "u8";
    case ScalarType::U16: return "u16";
    case ScalarType::U32: return "u32";
    case ScalarType::U64: return "u64";
    case ScalarType::I8: return "i8";
    case ScalarType::I16: return "i16";
    case ScalarType::I32: return "i32";
    case ScalarType::I64: return "i64";
    case ScalarType::F32: return "f32";
    case ScalarType::F64: return "f64";
  }
  return "?";
}

namespace {

bool is_signed(ScalarType t) {
  return t == ScalarType::I8 || t == ScalarType::I16 || t == ScalarType::I32 || t == ScalarType::I64;
}

ScalarType parse_scalar(std::string_view text) {
  for (auto t : {ScalarType::U8, ScalarType::U16, ScalarType::U32, ScalarType::U64, ScalarType::I8,
                 ScalarType::I16, ScalarType::I32, ScalarType::I64, ScalarType::F32, ScalarType::F64}) {
    if (text == to_string(t)) return t;
  }
  throw Error(Errc::UnknownType, fmt::format("unknown field type '{}'", text));
}

void parse_type(std::string_view text, FieldDef& field) {
  const auto bracket = text.find('[');
  if (bracket == std::string_view::npos) {
    field.type = parse_scalar(text);
    return;
  }
  if (text.back() != ']') throw Error(Errc::UnknownType, fmt::format("malformed array type '{}'", text));
  field.type = parse_scalar(text.substr(0, bracket));
  const auto digits = text.substr(bracket + 1, text.size() - bracket - 2);
  std::size_t n = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') throw Error(Errc::UnknownType, fmt::format("malformed array type '{}'", text));
    n = n * 10 + static_cast<std::size_t>(c - '0');
  }
  if (n == 0) throw Error(Errc::UnknownType, fmt::format("zero-length array '{}'", text));
  field.count = n;
  field.is_array = true;
}

void put_scalar(ByteWriter& w, const FieldDef& f, const json& v) {
  if (v.is_null()) {
    w.put_uint(0, scalar_size(f.type));
    return;
  }
  if (!v.is_number() && !v.is_boolean()) {
    throw Error(Errc::BadLength, fmt::format("field '{}' expects a number", f.name));
  }
  switch (f.type) {
    case ScalarType::F32: w.put_f32(v.get<float>()); return;
    case ScalarType::F64: w.put_f64(v.get<double>()); return;
    default: break;
  }
  const std::size_t width = scalar_size(f.type);
  if (is_signed(f.type)) {
    const auto value = v.get<std::int64_t>();
    const std::int64_t lo = width == 8 ? std::numeric_limits<std::int64_t>::min() : -(std::int64_t{1} << (8 * width - 1));
    const std::int64_t hi = width == 8 ? std::numeric_limits<std::int64_t>::max() : (std::int64_t{1} << (8 * width - 1)) - 1;
    if (value < lo || value > hi) throw Error(Errc::BadLength, fmt::format("field '{}' value {} out of range", f.name, value));
    w.put_uint(static_cast<std::uint64_t>(value), width);
  } else {
    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
      throw Error(Errc::BadLength, fmt::format("field '{}' is unsigned", f.name));
    }
    const auto value = v.get<std::uint64_t>();
    if (width < 8 && value >= (std::uint64_t{1} << (8 * width))) {
      throw Error(Errc::BadLength, fmt::format("field '{}' value {} out of range", f.name, value));
    }
    w.put_uint(value, width);
  }
}

json get_scalar(ByteReader& r, const FieldDef& f) {
  switch (f.type) {
    case ScalarType::F32: return static_cast<double>(r.get_f32());
    case ScalarType::F64: return r.get_f64();
    case ScalarType::I8: return static_cast<std::int64_t>(r.get<std::int8_t>());
    case ScalarType::I16: return static_cast<std::int64_t>(r.get<std::int16_t>());
    case ScalarType::I32: return static_cast<std::int64_t>(r.get<std::int32_t>());
    case ScalarType::I64: return r.get<std::int64_t>();
    default: return r.get_uint(scalar_size(f.type));
  }
}

json scaled(const FieldDef& f, const json& raw) {
  if (!f.scale) return raw;
  return raw.get<double>() * *f.scale;
}

}  // namespace

MessageCodec::MessageCodec(std::string name, std::uint16_t id, std::vector<FieldDef> fields)
    : name_(std::move(name)), id_(id), fields_(std::move(fields)) {
  for (auto& f : fields_) {
    f.offset = size_;
    size_ += f.size();
  }
}

const FieldDef* MessageCodec::field(std::string_view name) const {
  for (const auto& f : fields_) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

Bytes MessageCodec::encode(const json& values) const {
  Bytes out;
  out.reserve(size_);
  ByteWriter w(out);
  for (const auto& f : fields_) {
    const json v = values.is_object() && values.contains(f.name) ? values.at(f.name) : json();
    if (f.is_array) {
      for (std::size_t i = 0; i < f.count; ++i) {
        put_scalar(w, f, v.is_array() && i < v.size() ? v.at(i) : json());
      }
    } else {
      put_scalar(w, f, v);
    }
  }
  return out;
}

json MessageCodec::decode(ByteView payload) const {
  if (payload.size() != size_) {
    throw Error(Errc::WrongLength, fmt::format("message '{}' expects {} bytes, got {}", name_, size_, payload.size()));
  }
  ByteReader r(payload);
  json out = json::object();
  for (const auto& f : fields_) {
    if (f.is_array) {
      json arr = json::array();
      for (std::size_t i = 0; i < f.count; ++i) arr.push_back(get_scalar(r, f));
      out[f.name] = std::move(arr);
    } else {
      out[f.name] = get_scalar(r, f);
    }
  }
  return out;
}

json MessageCodec::normalize(ByteView payload) const {
  const json raw = decode(payload);
  json out = json::object();
  for (const auto& f : fields_) {
    json entry = json::object();
    const json& value = raw.at(f.name);
    if (f.is_array) {
      json arr = json::array();
      for (const auto& element : value) arr.push_back(scaled(f, element));
      entry["value"] = std::move(arr);
    } else {
      entry["value"] = scaled(f, value);
    }
    if (!f.unit.empty()) entry["unit"] = f.unit;
    out[f.name] = std::move(entry);
  }
  return out;
}

CodecSet CodecSet::compile(const json& definition) {
  if (!definition.is_object() || !definition.contains("messages") || !definition.at("messages").is_array()) {
    throw Error(Errc::ScenarioError, "message definition needs a 'messages' array");
  }
  CodecSet set;
  set.version_ = definition.value("version", std::uint8_t{1});
  std::set<std::string> names;
  for (const auto& msg : definition.at("messages")) {
    const auto name = msg.at("name").get<std::string>();
    const auto id = msg.at("id").get<std::uint16_t>();
    if (set.by_id_.count(id) != 0) {
      throw Error(Errc::DuplicateMsgId, fmt::format("msg-id {} used by '{}' and '{}'", id,
                                                    set.messages_[set.by_id_.at(id)].name(), name));
    }
    if (!names.insert(name).second) throw Error(Errc::ScenarioError, fmt::format("duplicate message name '{}'", name));
    std::vector<FieldDef> fields;
    std::set<std::string> field_names;
    for (const auto& fj : msg.value("fields", json::array())) {
      FieldDef f;
      f.name = fj.at("name").get<std::string>();
      if (!field_names.insert(f.name).second) {
        throw Error(Errc::ScenarioError, fmt::format("duplicate field '{}' in '{}'", f.name, name));
      }
      parse_type(fj.at("type").get<std::string>(), f);
      if (fj.contains("scale")) f.scale = fj.at("scale").get<double>();
      f.unit = fj.value("unit", std::string{});
      fields.push_back(std::move(f));
    }
    set.by_id_[id] = set.messages_.size();
    set.messages_.emplace_back(name, id, std::move(fields));
  }
  return set;
}

CodecSet CodecSet::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::ScenarioError, "cannot open schema file " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ScenarioError, fmt::format("schema {}: {}", file.string(), e.what()));
  }
  return compile(doc);
}

std::filesystem::path CodecSet::default_schema_path() {
  if (const char* env = std::getenv("SEEDSIM_DATA_DIR")) return std::filesystem::path(env) / "messages.json";
  return std::filesystem::path(SEEDSIM_DEFAULT_DATA_DIR) / "messages.json";
}

CodecSet CodecSet::builtin() { return load(default_schema_path()); }

const MessageCodec* CodecSet::find(std::uint16_t id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &messages_[it->second];
}

const MessageCodec& CodecSet::by_id(std::uint16_t id) const {
  if (const auto* codec = find(id)) return *codec;
  throw Error(Errc::UnknownMessage, fmt::format("msg-id 0x{:04x}", id));
}

const MessageCodec& CodecSet::by_name(std::string_view name) const {
  for (const auto& m : messages_) {
    if (m.name() == name) return m;
  }
  throw Error(Errc::UnknownMessage, fmt::format("message '{}'", name));
}

}  // namespace seedsim::protocol
