#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace qshare {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Base class for all domain errors raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid model data (graph, network, parameters).
class ModelError : public Error {
  public:
    using Error::Error;
};

/// An iterative numerical procedure failed to converge.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

  private:
    double last_residual_;
};

/// Time integration failed (step-size underflow, non-finite state).
class IntegrationError : public Error {
  public:
    IntegrationError(const std::string& what, double time) : Error(what), time_(time) {}

    double time() const noexcept { return time_; }

  private:
    double time_;
};

inline Vec ones(Eigen::Index n) { return Vec::Ones(n); }

}  // namespace qshare
