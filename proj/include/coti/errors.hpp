#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coti {

enum class ErrorKind {
  // datapool
  MissingFile,
  MalformedRecord,
  DimensionMismatch,
  DuplicateId,
  UnknownId,
  IoFailure,
  ConfigMismatch,
  // scorers
  EmptyPositives,
  UnlabeledSample,
  EmptyReference,
  MissingNegatives,
  // acquisition
  EmptyGeneratedSet,
  BudgetExceedsPool,
  MissingScore,
  InvalidCycleIndex,
  // engine
  EmptyTrainingPool,
  ExhaustedPool,
  InvalidConfig,
  // metrics
  InvalidR,
  DegeneratePool,
  NumericalFailure,
  // plugin bridge
  SpawnFailure,
  Timeout,
  VersionMismatch,
  MalformedReply,
  LengthMismatch,
  PluginError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every domain failure in the library surfaces as this exception; callers
// branch on kind() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace coti
