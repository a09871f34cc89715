#pragma once

#include <stdexcept>
#include <string>

namespace irdrop {

// Root of every failure the library reports. Subclasses tell the caller
// which stage rejected the input; the CLI maps all of them to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Netlist or node-name rejection; carries the 1-based source line when known.
struct ParseError : Error {
    ParseError(int line_no, const std::string& msg) : Error(msg), line(line_no) {}
    explicit ParseError(const std::string& msg) : Error(msg) {}
    int line = 0;
};

struct GraphError : Error {
    using Error::Error;
};

struct SolveError : Error {
    using Error::Error;
};

// Dimension/shape contract violations (maps, tensors, weights).
struct ShapeError : Error {
    using Error::Error;
};

// Model configuration that violates an architectural invariant.
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace irdrop
