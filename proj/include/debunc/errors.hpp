#pragma once

#include <stdexcept>
#include <string>

namespace debunc {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation that requires at least one element received none.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// A relevance scorer returned all-zero weights, so normalization is undefined.
class DegenerateRelevanceError : public Error {
 public:
  using Error::Error;
};

/// AUROC is undefined when one of the two classes has no samples.
class UndefinedAurocError : public Error {
 public:
  using Error::Error;
};

/// A score of the wrong kind was passed (e.g. a scalar where an oracle flag is required).
class WrongMetricError : public Error {
 public:
  using Error::Error;
};

/// A score list mixes scalar and oracle kinds.
class InconsistentMetricError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (model shape, debate parameters, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A backend lacks a capability the caller requires (attention hooks, logprobs, ...).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A backend failed to produce a response (e.g. transport failure after retries).
class BackendError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated (span out of range, unnormalized weights, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed external input (dataset line, config file, dump header).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace debunc
