#pragma once

#include <stdexcept>
#include <string>

namespace kgconc {

/// Broad failure classes; the CLI maps them to exit codes.
enum class ErrorKind {
    parameter_domain,  ///< invalid physical or family parameter
    consistency,       ///< internal-consistency check failed
    config,            ///< configuration validation
    construction,      ///< numerical construction could not be completed
    resolution,        ///< sampling too coarse or too short
    domain,            ///< query outside the sampled or admissible domain
    shape,             ///< mismatched grids
    invalid_field      ///< NaN/Inf in inputs
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string kind_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::parameter_domain: return "parameter-domain";
    case ErrorKind::consistency: return "internal-consistency";
    case ErrorKind::config: return "config";
    case ErrorKind::construction: return "construction-failure";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::domain: return "domain";
    case ErrorKind::shape: return "shape";
    case ErrorKind::invalid_field: return "invalid-field";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg)
{
    throw Error(kind, kind_name(kind) + ": " + msg);
}

inline void require(bool ok, ErrorKind kind, const std::string& msg)
{
    if (!ok) fail(kind, msg);
}

}  // namespace kgconc
