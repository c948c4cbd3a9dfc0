#pragma once
// Exception hierarchy. The three bases map onto the CLI exit codes:
// ConfigError -> 2, DataError -> 3, NumericError -> 4.

#include <stdexcept>
#include <string>

namespace fairlr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// data construction / validation
struct EmptyGroupError : DataError {
  explicit EmptyGroupError(const std::string& what) : DataError("EmptyGroup: " + what) {}
};

struct DegenerateLabelsError : DataError {
  explicit DegenerateLabelsError(const std::string& what) : DataError("DegenerateLabels: " + what) {}
};

struct DimMismatchError : DataError {
  explicit DimMismatchError(const std::string& what) : DataError("DimMismatch: " + what) {}
};

struct LengthMismatchError : DataError {
  explicit LengthMismatchError(const std::string& what) : DataError("LengthMismatch: " + what) {}
};

// dataset ingestion
struct SchemaMismatchError : DataError {
  explicit SchemaMismatchError(const std::string& what) : DataError("SchemaMismatch: " + what) {}
};

struct ParseError : DataError {
  explicit ParseError(const std::string& what) : DataError("ParseError: " + what) {}
};

struct EmptyAfterFilteringError : DataError {
  explicit EmptyAfterFilteringError(const std::string& what)
      : DataError("EmptyAfterFiltering: " + what) {}
};

struct DegenerateSplitError : DataError {
  explicit DegenerateSplitError(const std::string& what) : DataError("DegenerateSplit: " + what) {}
};

struct FeatureMismatchError : DataError {
  explicit FeatureMismatchError(const std::string& what) : DataError("FeatureMismatch: " + what) {}
};

// targeting
struct TargetOutOfRangeError : ConfigError {
  explicit TargetOutOfRangeError(const std::string& what) : ConfigError("TargetOutOfRange: " + what) {}
};

struct DegenerateTargetError : ConfigError {
  explicit DegenerateTargetError(const std::string& what) : ConfigError("DegenerateTarget: " + what) {}
};

// training / prediction
struct EmptyBatchError : ConfigError {
  explicit EmptyBatchError(const std::string& what) : ConfigError("EmptyBatch: " + what) {}
};

struct MissingSensitiveError : ConfigError {
  explicit MissingSensitiveError(const std::string& what) : ConfigError("MissingSensitive: " + what) {}
};

struct NonFiniteError : NumericError {
  explicit NonFiniteError(const std::string& what) : NumericError("NonFinite: " + what) {}
};

}  // namespace fairlr
