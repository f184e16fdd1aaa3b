#pragma once

#include <stdexcept>
#include <string>

namespace xdrs {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimMismatch : Error {
  explicit DimMismatch(const std::string& msg) : Error(msg) {}
};

struct NotSpd : Error {
  explicit NotSpd(const std::string& msg) : Error(msg) {}
};

struct NotPsd : Error {
  explicit NotPsd(const std::string& msg) : Error(msg) {}
};

struct SingularSystem : Error {
  explicit SingularSystem(const std::string& msg) : Error(msg) {}
};

struct ConjugateUnavailable : Error {
  explicit ConjugateUnavailable(const std::string& msg) : Error(msg) {}
};

struct InfiniteValue : Error {
  explicit InfiniteValue(const std::string& msg) : Error(msg) {}
};

struct NotConverged : Error {
  explicit NotConverged(const std::string& msg) : Error(msg) {}
};

struct UnsupportedSubproblem : Error {
  explicit UnsupportedSubproblem(const std::string& msg) : Error(msg) {}
};

struct ComplexRegime : Error {
  explicit ComplexRegime(const std::string& msg) : Error(msg) {}
};

struct LiftingUnavailable : Error {
  explicit LiftingUnavailable(const std::string& msg) : Error(msg) {}
};

struct DegenerateLines : Error {
  explicit DegenerateLines(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace xdrs
