#pragma once

#include <stdexcept>
#include <string>

namespace parest {

// Sample cannot be normalized (e.g. max == min for min-max scaling).
class DegenerateSampleError : public std::runtime_error {
 public:
  explicit DegenerateSampleError(const std::string& what)
      : std::runtime_error(what) {}
};

class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what)
      : std::runtime_error(what) {}
};

// Training loss became non-finite; the last good checkpoint is kept on disk.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

class UndefinedStatisticError : public std::runtime_error {
 public:
  explicit UndefinedStatisticError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace parest
