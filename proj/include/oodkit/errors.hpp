// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace oodkit {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Posterior p(i|x) requested at a point with zero mixture mass.
struct UndefinedPosterior : Error {
  using Error::Error;
};

/// Class conditional p(y|x,i) requested where the in-marginal vanishes.
struct UndefinedConditional : Error {
  using Error::Error;
};

/// Complement-distribution parameter drives some mass negative.
struct AlphaTooLarge : Error {
  using Error::Error;
};

/// Likelihood ratio requested against an out-distribution with a support hole.
struct OutSupportHole : Error {
  using Error::Error;
};

/// Monotone transform applied outside its domain.
struct DomainViolation : Error {
  using Error::Error;
};

/// Sample metric called with an empty score list.
struct EmptySample : Error {
  using Error::Error;
};

/// Report assembly found a row/column combination without a value.
struct MissingCell : Error {
  using Error::Error;
};

/// Logit table (or parameter vector) shaped inconsistently with the loss kind.
struct ShapeMismatch : Error {
  using Error::Error;
};

/// Optimization produced a non-finite loss or gradient.
struct DivergenceDetected : Error {
  using Error::Error;
};

/// Distribution masses violate non-negativity or normalization.
struct InvalidMass : Error {
  using Error::Error;
};

struct UnknownScenario : Error {
  using Error::Error;
};

struct InvalidParams : Error {
  using Error::Error;
};

struct IoFailure : Error {
  using Error::Error;
};

}  // namespace oodkit
