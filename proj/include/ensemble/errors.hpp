#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ensemble {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ForeignSymbolError : public Error {
 public:
  using Error::Error;
};

class NotPrefixFreeError : public Error {
 public:
  NotPrefixFreeError(std::string prefix, std::string extension)
      : Error("not prefix-free: '" + prefix + "' is a prefix of '" + extension + "'"),
        prefix_(std::move(prefix)),
        extension_(std::move(extension)) {}
  [[nodiscard]] const std::string& prefix() const noexcept { return prefix_; }
  [[nodiscard]] const std::string& extension() const noexcept { return extension_; }

 private:
  std::string prefix_;
  std::string extension_;
};

class ZeroConditioningError : public Error {
 public:
  using Error::Error;
};

class BudgetExhaustedError : public Error {
 public:
  BudgetExhaustedError(const std::string& what, std::uint64_t steps)
      : Error(what + " (budget exhausted after " + std::to_string(steps) + " steps)"), steps_(steps) {}
  [[nodiscard]] std::uint64_t steps() const noexcept { return steps_; }

 private:
  std::uint64_t steps_;
};

/// Carries the offending string / symbol rendered as text.
class WitnessError : public Error {
 public:
  WitnessError(const std::string& what, std::string witness)
      : Error(what + ": " + witness), witness_(std::move(witness)) {}
  [[nodiscard]] const std::string& witness() const noexcept { return witness_; }

 private:
  std::string witness_;
};

class InjectivityError : public WitnessError {
 public:
  using WitnessError::WitnessError;
};

class PartitionError : public WitnessError {
 public:
  using WitnessError::WitnessError;
};

class CoverViolationError : public WitnessError {
 public:
  using WitnessError::WitnessError;
};

class InclusionViolationError : public WitnessError {
 public:
  using WitnessError::WitnessError;
};

class UndefinedSelectorError : public WitnessError {
 public:
  using WitnessError::WitnessError;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A finite (recorded) stream ran out of symbols.
class StreamExhaustedError : public Error {
 public:
  StreamExhaustedError(std::uint64_t produced)
      : Error("stream exhausted after " + std::to_string(produced) + " symbols"), produced_(produced) {}
  [[nodiscard]] std::uint64_t produced() const noexcept { return produced_; }

 private:
  std::uint64_t produced_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ensemble
