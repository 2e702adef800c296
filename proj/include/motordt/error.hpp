#pragma once

#include <stdexcept>
#include <string>

namespace motordt {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A series division whose leading denominator coefficient is too close to zero.
class SingularDivision : public Error {
 public:
  SingularDivision(const std::string& where, double leading)
      : Error(where + ": singular division, leading coefficient " + std::to_string(leading)),
        leading_(leading) {}

  [[nodiscard]] double leading() const noexcept { return leading_; }

 private:
  double leading_;
};

/// The 2x2 motor/source coupling system is singular or badly conditioned.
class CouplingSingular : public Error {
 public:
  using Error::Error;
};

/// An operation was invoked out of its documented call order or contract.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Torque balance has no root inside the slip search bracket.
class NoEquilibrium : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters, configuration or scenario data.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Failure inside the windowed marcher, annotated with where it happened.
class SimulationFailure : public Error {
 public:
  SimulationFailure(std::size_t window, std::size_t order, double t, const std::string& cause)
      : Error("window " + std::to_string(window) + " (t=" + std::to_string(t) + "), order " +
              std::to_string(order) + ": " + cause),
        window_(window),
        order_(order) {}

  [[nodiscard]] std::size_t window() const noexcept { return window_; }
  [[nodiscard]] std::size_t order() const noexcept { return order_; }

 private:
  std::size_t window_;
  std::size_t order_;
};

}  // namespace motordt
