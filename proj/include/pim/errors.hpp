#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An orbit touched the partition boundary at the given step.
struct BoundaryHit : Error {
  std::size_t step;
  explicit BoundaryHit(std::size_t k)
      : Error("orbit hits partition boundary at step " + std::to_string(k)), step(k) {}
};

struct CellBudgetExceeded : Error {
  explicit CellBudgetExceeded(std::size_t budget)
      : Error("cell budget exceeded (" + std::to_string(budget) + ")") {}
};

struct ElementBudgetExceeded : Error {
  explicit ElementBudgetExceeded(std::size_t budget)
      : Error("element budget exceeded (" + std::to_string(budget) + ")") {}
};

struct WordBudgetExceeded : Error {
  explicit WordBudgetExceeded(std::size_t budget)
      : Error("word budget exceeded (" + std::to_string(budget) + ")") {}
};

// A destination beyond the truncation depth of a tower was requested.
struct Unsaturated : Error {
  using Error::Error;
};

struct NotMarkov : Error {
  using Error::Error;
};

struct NoStationaryDensity : Error {
  using Error::Error;
};

struct PreconditionUnverified : Error {
  using Error::Error;
};

struct ZeroBaseMass : Error {
  ZeroBaseMass() : Error("measure gives zero mass to the inducing base") {}
};

struct ParseError : Error {
  std::size_t line;
  ParseError(std::size_t line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

}  // namespace pim
