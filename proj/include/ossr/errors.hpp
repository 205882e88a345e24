#pragma once

#include <stdexcept>
#include <string>

namespace ossr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// numerics
struct SingularMatrix : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// generator / oracle
struct BracketFailure : Error { using Error::Error; };

// plant structure
struct NoRelativeDegree : Error { using Error::Error; };
struct DegenerateTransform : Error { using Error::Error; };

// synthesis
struct Uncontrollable : Error { using Error::Error; };
struct Unobservable : Error { using Error::Error; };
struct Unsolvable : Error { using Error::Error; };
struct AssignmentFailure : Error { using Error::Error; };
struct NotMinimumPhase : Error { using Error::Error; };
struct ZeroHighFrequencyGain : Error { using Error::Error; };

// simulation / scenario
struct NonFiniteState : Error { using Error::Error; };
struct ScenarioError : Error { using Error::Error; };
struct AssumptionError : Error { using Error::Error; };

}  // namespace ossr
