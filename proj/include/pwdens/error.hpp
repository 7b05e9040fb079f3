#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pwdens {

enum class ErrorKind {
    invalid_spectrum,
    invalid_parameter,
    insufficient_data,
    invalid_nodes,
    ill_conditioned,
    subspace_too_small,
    invalid_input,
    no_bound,
    resolution,
    degenerate_subspace,
    schema,
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_spectrum: return "invalid-spectrum";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::invalid_nodes: return "invalid-nodes";
    case ErrorKind::ill_conditioned: return "ill-conditioned";
    case ErrorKind::subspace_too_small: return "subspace-too-small";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::no_bound: return "no-bound";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::degenerate_subspace: return "degenerate-subspace";
    case ErrorKind::schema: return "schema";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Thrown when a quadrature is too coarse; carries a node count that should suffice.
class ResolutionError : public Error {
public:
    ResolutionError(const std::string& message, std::size_t suggested_nodes)
        : Error(ErrorKind::resolution, message + " (suggested n_nodes >= " +
                                           std::to_string(suggested_nodes) + ")"),
          suggested_nodes_(suggested_nodes) {}

    std::size_t suggested_nodes() const noexcept { return suggested_nodes_; }

private:
    std::size_t suggested_nodes_;
};

/// A perturbed vector v_j lies farther than d from u_j.
class PreconditionError : public Error {
public:
    PreconditionError(std::size_t index, double distance, double bound)
        : Error(ErrorKind::invalid_input,
                "||v_j - u_j|| = " + std::to_string(distance) + " exceeds d = " +
                    std::to_string(bound) + " at j = " + std::to_string(index)),
          index_(index), distance_(distance) {}

    std::size_t index() const noexcept { return index_; }
    double distance() const noexcept { return distance_; }

private:
    std::size_t index_;
    double distance_;
};

} // namespace pwdens
