#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace decouple {

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable identifier used by the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& message) : Error("shape_mismatch", message) {}
};

class InvalidMesh : public Error {
public:
    InvalidMesh(std::string invariant, const std::string& message)
        : Error("invalid_mesh", message), invariant_(std::move(invariant)) {}

    [[nodiscard]] const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// Raised by the Krylov solvers when the iteration budget is exhausted or the
/// residual stagnates. Carries the residual history for diagnostics.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& message, double final_residual, std::vector<double> history,
                   bool stagnated = false)
        : Error(stagnated ? "stagnation" : "nonconvergence", message),
          final_residual_(final_residual),
          history_(std::move(history)),
          stagnated_(stagnated) {}

    [[nodiscard]] double final_residual() const noexcept { return final_residual_; }
    [[nodiscard]] const std::vector<double>& history() const noexcept { return history_; }
    [[nodiscard]] bool stagnated() const noexcept { return stagnated_; }

private:
    double final_residual_;
    std::vector<double> history_;
    bool stagnated_;
};

/// The assembled system has a nontrivial kernel the caller did not constrain
/// (e.g. a pressure without the mean-zero row).
class SingularSystem : public Error {
public:
    explicit SingularSystem(const std::string& message) : Error("singular_system", message) {}
};

}  // namespace decouple
