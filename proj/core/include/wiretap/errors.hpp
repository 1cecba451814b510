#pragma once

#include <stdexcept>

namespace wiretap {

// Eavesdropper cannot be factored through the main output.
struct NotDegraded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A formula was requested for a system violating its structural hypothesis.
struct StructuralAssumptionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested code parameters cannot be realized (e.g. more bins than words).
struct InfeasibleSpec : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact enumeration would exceed the hard size cap.
struct TooLargeForExact : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Typicality decoding found no unique candidate.
struct DecodingFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wiretap
