#pragma once

// Error taxonomy for the shift/transfer machinery.  Everything derives from
// tms::Error so callers can catch the whole family; the CLI maps a few of
// these to dedicated exit codes.

#include <stdexcept>
#include <string>

namespace tms {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A state label outside the model's state set was used.
struct UnknownStateError : Error { using Error::Error; };

// A word or point violates the transition structure.
struct InadmissibleError : Error { using Error::Error; };

// Bounded cycle search from a state's successor closure found nothing.
struct NoCycleReachableError : Error { using Error::Error; };

// An operation that needs a Markovian (range-2) potential got a longer range.
struct RangeTooLargeError : Error { using Error::Error; };

// Green-type series with sustained ratios >= 1: the sum diverges.
struct DivergingError : Error {
  DivergingError(const std::string& what, double partial, int n_terms)
      : Error(what), partial(partial), n_terms(n_terms) {}
  double partial;
  int n_terms;
};

// Term budget ran out before a certificate was reached.
struct BudgetExhaustedError : Error {
  BudgetExhaustedError(const std::string& what, double partial, int n_terms)
      : Error(what), partial(partial), n_terms(n_terms) {}
  double partial;
  int n_terms;
};

// An orbit handed to the boundary atlas does not leave finite state sets.
struct NotEscapingError : Error { using Error::Error; };

// Kernel profiles along an orbit fail the trailing Cauchy diagnostic.
struct NotCauchyError : Error { using Error::Error; };

// Two kernel profiles (or a profile and a metric) use different test sets.
struct MismatchedTestSetError : Error { using Error::Error; };

// Conditioning event has (numerically) zero measure in a DLR check.
struct ZeroMassConditioningError : Error { using Error::Error; };

// Riesz decomposition found a negative charge: the measure is not excessive.
struct NotExcessiveError : Error { using Error::Error; };

// A function handed to measure_from_harmonic fails the mean-value identity.
struct NotHarmonicError : Error { using Error::Error; };

// Backward sampler reached a state with total extension weight zero.
struct SamplerDegenerateError : Error { using Error::Error; };

// Model-definition file could not be parsed; carries a 1-based line number.
struct ParseError : Error {
  ParseError(const std::string& what, int line) : Error(what), line(line) {}
  int line;
};

}  // namespace tms
