#pragma once

#include <stdexcept>
#include <string>

namespace coarse {

enum class ErrorKind {
    Input,             // malformed data: dangling ids, non-functions, bad JSON
    ShapeMismatch,     // block shapes, mismatched ambient spaces
    CapExceeded,       // clique / search / dimension caps
    NotConverged,      // power iteration
    NoLift,
    NonUniqueLift,
    EdgeInBranchLocus,
    NoAdmissibleIndex, // no member of the big family works for the requested scale
    ThinningsDoNotCover,
    NotEquivariant,
    NotFundamentalDomain,
    Hypothesis,        // a stated hypothesis of an identity does not hold
};

inline const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::CapExceeded: return "cap-exceeded";
    case ErrorKind::NotConverged: return "not-converged";
    case ErrorKind::NoLift: return "no-lift";
    case ErrorKind::NonUniqueLift: return "non-unique-lift";
    case ErrorKind::EdgeInBranchLocus: return "edge-in-branch-locus";
    case ErrorKind::NoAdmissibleIndex: return "no-admissible-index";
    case ErrorKind::ThinningsDoNotCover: return "thinnings-do-not-cover";
    case ErrorKind::NotEquivariant: return "not-equivariant";
    case ErrorKind::NotFundamentalDomain: return "not-fundamental-domain";
    case ErrorKind::Hypothesis: return "hypothesis";
    }
    return "unknown";
}

class CoarseError : public std::runtime_error {
public:
    CoarseError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw CoarseError(kind, what);
}

} // namespace coarse
