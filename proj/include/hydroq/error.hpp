#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hydroq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define HYDROQ_DEFINE_ERROR(Name)                                              \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

// scenario
HYDROQ_DEFINE_ERROR(ParseError);
HYDROQ_DEFINE_ERROR(MissingSeries);
HYDROQ_DEFINE_ERROR(CoverageError);

/// Raised when a scenario field violates its invariant. `field()` names it.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

// plant
HYDROQ_DEFINE_ERROR(IllegalTransition);
HYDROQ_DEFINE_ERROR(InvalidEdge);
HYDROQ_DEFINE_ERROR(SimultaneousChargeDischarge);
HYDROQ_DEFINE_ERROR(PowerLimitExceeded);
HYDROQ_DEFINE_ERROR(SocOutOfBounds);
HYDROQ_DEFINE_ERROR(HydrogenOutOfBounds);
HYDROQ_DEFINE_ERROR(WindowMismatch);
HYDROQ_DEFINE_ERROR(PowerWhenNotOn);

// stage models
HYDROQ_DEFINE_ERROR(HorizonMismatch);
HYDROQ_DEFINE_ERROR(InfeasibleInitialState);
HYDROQ_DEFINE_ERROR(CommitmentGap);
HYDROQ_DEFINE_ERROR(InvalidOneHot);
HYDROQ_DEFINE_ERROR(LengthMismatch);

// qubo
HYDROQ_DEFINE_ERROR(MissingPenalty);
HYDROQ_DEFINE_ERROR(Overflow);

// solvers
HYDROQ_DEFINE_ERROR(TooLarge);
HYDROQ_DEFINE_ERROR(RemoteUnavailable);
HYDROQ_DEFINE_ERROR(ProtocolError);
HYDROQ_DEFINE_ERROR(EnergyMismatch);

#undef HYDROQ_DEFINE_ERROR

} // namespace hydroq
