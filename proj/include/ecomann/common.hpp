#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ecomann {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A point in the ambient configuration space.
using Configuration = Eigen::VectorXd;

/// Row-major storage so each row is one configuration.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using IndexList = std::vector<Eigen::Index>;

// Every error carries the name of the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& msg)
      : std::runtime_error("[" + module + "] " + msg), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class ProjectionError : public Error {
 public:
  using Error::Error;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecomann
