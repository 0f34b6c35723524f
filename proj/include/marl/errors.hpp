#pragma once

#include <stdexcept>
#include <string>

namespace marl {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct KindError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyBufferError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neighbor gathering ran out of anchors before reaching the batch size.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InstrumentationError : std::logic_error {
  using std::logic_error::logic_error;
};

struct EmptyReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PairingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace marl
