#pragma once

#include <stdexcept>
#include <string>

namespace consyn {

/// Base class for all domain errors raised by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DisconnectedGraph : public Error {
  public:
    using Error::Error;
};

class UnstableMatrix : public Error {
  public:
    using Error::Error;
};

class NotDetectable : public Error {
  public:
    using Error::Error;
};

class NotStabilizable : public Error {
  public:
    using Error::Error;
};

class NonzeroFeedthrough : public Error {
  public:
    using Error::Error;
};

class IllFormed : public Error {
  public:
    using Error::Error;
};

class NumericalFailure : public Error {
  public:
    using Error::Error;
};

class InfeasibleBudget : public Error {
  public:
    using Error::Error;
};

class RankDeficient : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

class NonpositiveStep : public Error {
  public:
    using Error::Error;
};

class UnknownSeries : public Error {
  public:
    using Error::Error;
};

/// Raised by the certification routines; carries the Laplacian eigenvalue of
/// the offending subsystem.
class UnstableSubsystem : public Error {
  public:
    UnstableSubsystem(const std::string& what, double lambda)
        : Error(what), lambda_(lambda) {}
    double lambda() const noexcept { return lambda_; }

  private:
    double lambda_;
};

}  // namespace consyn
