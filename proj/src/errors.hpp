#pragma once

#include <stdexcept>
#include <string>

namespace wpcj {

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidConfig : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Solver gave up (iteration cap, factorization breakdown, stalled line search).
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Problem certified infeasible (e.g. the SR target is unreachable).
struct InfeasibleProblem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnboundedProblem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dominant-eigenvalue ratio of the recovered matrix exceeded the tightness
// threshold; signals a relaxation gap that the optimality theory rules out.
struct Rank1ExtractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AllZeroMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InitializationInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingDuals : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace wpcj
