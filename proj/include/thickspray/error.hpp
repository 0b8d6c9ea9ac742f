#pragma once

#include <stdexcept>
#include <string>

namespace thickspray {

enum class ErrorKind {
    NumericInput,  // non-finite input data
    Vacuum,        // density reached zero or below
    Bound,         // pointwise bounds or the 1 - rho_f floor violated
    Config,        // invalid configuration or parameters
    Tail,          // characteristic left the velocity box where f is not negligible
    Horizon,       // straightening fixed point failed to contract
    Domain,        // force queried outside of its time interval
    Resolution,    // requested derivative order not resolved by the grid
    Divergence,    // numerical blow-up
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NumericInput: return "numeric-input";
    case ErrorKind::Vacuum: return "vacuum";
    case ErrorKind::Bound: return "bound";
    case ErrorKind::Config: return "config";
    case ErrorKind::Tail: return "tail";
    case ErrorKind::Horizon: return "horizon";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Divergence: return "divergence";
    }
    return "unknown";
}

}  // namespace thickspray
