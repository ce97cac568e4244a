#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seedsim {

enum class Errc {
  // kernel
  PastEvent,
  ScenarioError,
  // middleware
  UnknownTopic,
  SizeMismatch,
  ForwardingOverlap,
  // transports
  BusError,
  PayloadTooLarge,
  // power
  NoSource,
  SequenceViolation,
  // flight
  PhaseError,
  OutOfModel,
  CorruptRecord,
  SequenceGap,
  // protocols
  BadSync,
  BadCrc,
  BadSignature,
  ReplayDetected,
  Truncated,
  BadLength,
  DuplicateMsgId,
  UnknownType,
  UnknownVersion,
  WrongLength,
  UnknownMessage,
  // ground
  BadMagic,
  InsufficientData,
  Timeout,
  NotFound,
  // recovery
  NoSignal,
  MaxStepsExceeded,
  // analysis
  TooShort,
  NoRotation,
  MissingChannels,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace seedsim
