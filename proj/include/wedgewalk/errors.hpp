#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wedgewalk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter outside its admissible domain (angles, layer counts, s outside [0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operators or vectors whose state spaces do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class UnreachableStateError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

// A path exceeded the step cap. Carries how many paths finished before the cap was hit.
class TimeoutError : public Error {
 public:
  TimeoutError(const std::string& what, std::size_t completed_paths)
      : Error(what), completed_paths_(completed_paths) {}

  std::size_t completed_paths() const noexcept { return completed_paths_; }

 private:
  std::size_t completed_paths_;
};

}  // namespace wedgewalk
