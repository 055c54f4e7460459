#pragma once

#include <stdexcept>
#include <string>

namespace pcw {

// Base class for all library errors. `code` is a stable machine-readable
// identifier emitted in CLI error JSON; `what()` carries the human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string &message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string &code() const noexcept { return code_; }

private:
    std::string code_;
};

struct InvalidSpec : Error {
    explicit InvalidSpec(const std::string &m) : Error("invalid_spec", m) {}
};

struct NoGuidedMode : Error {
    explicit NoGuidedMode(const std::string &m) : Error("no_guided_mode", m) {}
};

struct OverlappingHoles : Error {
    explicit OverlappingHoles(const std::string &m) : Error("overlapping_holes", m) {}
};

struct BasisTooLarge : Error {
    explicit BasisTooLarge(const std::string &m) : Error("basis_too_large", m) {}
};

struct BasisTooSmall : Error {
    explicit BasisTooSmall(const std::string &m) : Error("basis_too_small", m) {}
};

struct SingularEpsilon : Error {
    explicit SingularEpsilon(const std::string &m) : Error("singular_epsilon", m) {}
};

struct EigSolveFailure : Error {
    explicit EigSolveFailure(const std::string &m) : Error("eig_solve_failure", m) {}
};

struct NoGap : Error {
    explicit NoGap(const std::string &m) : Error("no_gap", m) {}
};

struct AsymmetricGeometry : Error {
    explicit AsymmetricGeometry(const std::string &m) : Error("asymmetric_geometry", m) {}
};

struct ZeroField : Error {
    explicit ZeroField(const std::string &m) : Error("zero_field", m) {}
};

struct EmptyMask : Error {
    explicit EmptyMask(const std::string &m) : Error("empty_mask", m) {}
};

struct NoneFound : Error {
    explicit NoneFound(const std::string &m) : Error("none_found", m) {}
};

// Configuration / usage problems. The CLI maps these to exit code 2,
// all other pcw::Error subclasses to exit code 1.
struct ConfigError : Error {
    explicit ConfigError(const std::string &m) : Error("config_error", m) {}
};

} // namespace pcw
