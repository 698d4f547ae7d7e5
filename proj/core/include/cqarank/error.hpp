#pragma once

#include <stdexcept>
#include <string>

namespace cqarank {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kUsage,          // bad configuration or arguments
  kData,           // malformed or inconsistent input data
  kIo,             // file could not be read or written
  kStaleArtifact,  // upstream artifact missing or out of date
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

/// Raised by the Posts.xml reader; carries the byte offset of the defect.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : DataError(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class StaleArtifactError : public Error {
 public:
  StaleArtifactError(const std::string& what, std::string stage)
      : Error(ErrorKind::kStaleArtifact, what), stage_(std::move(stage)) {}

  /// The pipeline stage that must be (re)run to fix the problem.
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace cqarank
