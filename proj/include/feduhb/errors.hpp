#pragma once

#include <stdexcept>
#include <string>

namespace feduhb {

/// Invalid configuration or argument domain (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch between parameter vectors, batches or features.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value where a finite one is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed on-disk data (IDX files, checkpoints, history records).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Protocol-level violations: empty client sets, empty history,
/// aggregation over nothing, state queried before it exists.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Metric or estimation failures: degenerate attack inputs, empty
/// eligible sets, non-convergent estimators, unsupported metrics.
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace feduhb
