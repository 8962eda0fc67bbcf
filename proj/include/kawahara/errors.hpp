#pragma once

#include <stdexcept>
#include <string>

namespace kawahara {

/// Bad input: a precondition of the called operation does not hold.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A solver declined to return a result (conditioning ceiling, tail check, ...).
class SolverRefusal : public std::runtime_error {
public:
    explicit SolverRefusal(const std::string& what) : std::runtime_error(what) {}
};

/// Time stepping blew up.
class NumericalInstability : public std::runtime_error {
public:
    explicit NumericalInstability(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw ValidationError(what);
}

}  // namespace kawahara
