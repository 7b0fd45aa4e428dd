#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace otm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGridError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class OutOfRangeError : public Error {
public:
    using Error::Error;
};

/// Input file problems (missing file, malformed PGM header, short payload).
class IngestionError : public Error {
public:
    using Error::Error;
};

/// A density pair violates hypothesis H2 (boundary values differ too much).
class HypothesisViolationError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Elliptic coefficient below its positivity floor.
class EllipticityError : public Error {
public:
    using Error::Error;
};

class SolverDivergenceError : public Error {
public:
    SolverDivergenceError(const std::string& what, double final_residual,
                          std::vector<double> history = {})
        : Error(what), final_residual(final_residual), residual_history(std::move(history)) {}

    double final_residual;
    std::vector<double> residual_history;
};

/// Division by a density that fell below the guard floor.
class DivisionGuardError : public Error {
public:
    using Error::Error;
};

class ExportError : public Error {
public:
    using Error::Error;
};

}  // namespace otm
