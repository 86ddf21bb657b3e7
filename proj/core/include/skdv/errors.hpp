#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace skdv {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix sizes. The message names the offending lengths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument violated a documented precondition.
class InvalidArgument : public Error {
 public:
  InvalidArgument(std::string key, std::string constraint)
      : Error(key + ": " + constraint),
        key_(std::move(key)),
        constraint_(std::move(constraint)) {}

  const std::string& key() const { return key_; }
  const std::string& constraint() const { return constraint_; }

 private:
  std::string key_;
  std::string constraint_;
};

/// Configuration file/key validation failure; names the key and the
/// constraint it violated.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Raised when a time step produces a non-finite state. Carries the last
/// finite state and its norms so callers can report where the run died.
class BlowUpError : public Error {
 public:
  BlowUpError(double time, double h_norm, double v_norm,
              Eigen::VectorXd last_finite_state)
      : Error("numerical blow-up at t=" + std::to_string(time) +
              " (|u|_H=" + std::to_string(h_norm) +
              ", |u|_V=" + std::to_string(v_norm) + ")"),
        time_(time),
        h_norm_(h_norm),
        v_norm_(v_norm),
        last_finite_state_(std::move(last_finite_state)) {}

  double time() const { return time_; }
  double h_norm() const { return h_norm_; }
  double v_norm() const { return v_norm_; }
  const Eigen::VectorXd& last_finite_state() const {
    return last_finite_state_;
  }

 private:
  double time_;
  double h_norm_;
  double v_norm_;
  Eigen::VectorXd last_finite_state_;
};

/// An ensemble exceeded the tolerated fraction of blown-up trajectories.
class BlowUpLimitError : public Error {
 public:
  using Error::Error;
};

/// File read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace skdv
