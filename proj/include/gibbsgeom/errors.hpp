#pragma once

#include <stdexcept>
#include <string>

namespace gibbsgeom {

/// Parameters outside the regime the construction can handle (e.g. a
/// near-critical thinning without the explicit override).
struct InvalidParams : std::runtime_error {
  explicit InvalidParams(const std::string& what) : std::runtime_error(what) {}
};

/// Backward exploration exceeded the configured padding or clan budget.
struct ClanOverflow : std::runtime_error {
  explicit ClanOverflow(const std::string& what) : std::runtime_error(what) {}
};

/// A score that needs marks was handed an unmarked configuration.
struct MissingMarks : std::runtime_error {
  explicit MissingMarks(const std::string& what) : std::runtime_error(what) {}
};

/// Truncation requested on a sample that carries no clan information.
struct MissingClanData : std::runtime_error {
  explicit MissingClanData(const std::string& what) : std::runtime_error(what) {}
};

/// Point handed to a score lies outside the score's domain.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Estimation window cannot hold the observed stabilization radii.
struct WindowTooSmall : std::runtime_error {
  explicit WindowTooSmall(const std::string& what) : std::runtime_error(what) {}
};

/// Pair correlation shows no decay before the quadrature cutoff.
struct DecayNotDetected : std::runtime_error {
  explicit DecayNotDetected(const std::string& what) : std::runtime_error(what) {}
};

/// Replicates are constant; nothing to standardize.
struct DegenerateVariance : std::runtime_error {
  explicit DegenerateVariance(const std::string& what) : std::runtime_error(what) {}
};

/// Too few usable grid points for a tail fit.
struct InsufficientTail : std::runtime_error {
  explicit InsufficientTail(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed run configuration (unknown key, bad value, missing field).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gibbsgeom
