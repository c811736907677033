#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gflsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Config text could not be tokenized; `line` is 1-based.
struct ParseError : Error {
    ParseError(int line_number, const std::string& what)
        : Error("line " + std::to_string(line_number) + ": " + what), line(line_number) {}
    int line = 0;
};

/// A parameter is out of range or inconsistent. The message names the
/// offending section.key.
struct ValidationError : Error {
    using Error::Error;
};

struct UnknownKeyError : Error {
    using Error::Error;
};

struct UnknownSignalError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

/// Rf + Rg vanished on some phase of the resistive divider.
struct DegenerateNetworkError : Error {
    using Error::Error;
};

/// Assembled residual at t = 0 exceeded the configured bound; the scenario
/// parameters are inconsistent with the initialization table.
struct InitError : Error {
    using Error::Error;
};

/// Newton failed inside a timestep. Carries the time stamp and the last
/// iterate so a caller can report or dump it.
struct SolverError : Error {
    SolverError(const std::string& what, double time, int iters, double rnorm,
                std::vector<double> last_state)
        : Error(what), t(time), iterations(iters), residual_norm(rnorm),
          state(std::move(last_state)) {}
    double t = 0.0;
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> state;
};

}  // namespace gflsim
