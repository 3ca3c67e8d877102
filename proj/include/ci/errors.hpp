#pragma once

#include <stdexcept>
#include <string>

namespace ci {

/// Point outside a field's box, or an argument outside an operation's domain.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Rank mismatch, bad order, or other misuse of an operation.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};
/// Input outside the oscillatory class an anti-divergence operator accepts.
struct ClassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// gamma solve left the admissible ball.
struct AdmissibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Stage or seed hypotheses violated by measured norms.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Bad configuration, schedule, or file.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// A verification audit failed.
struct AuditError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ci
