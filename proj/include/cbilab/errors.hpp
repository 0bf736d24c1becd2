#pragma once

#include <stdexcept>
#include <string>

namespace cbilab {

/// Base class for all library errors; carries a short stable code plus a message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct NotEssentiallyNonnegative : Error {
    explicit NotEssentiallyNonnegative(const std::string& w) : Error("NotEssentiallyNonnegative", w) {}
};
struct NotIrreducible : Error {
    explicit NotIrreducible(const std::string& w) : Error("NotIrreducible", w) {}
};
struct EigenSolverFailure : Error {
    explicit EigenSolverFailure(const std::string& w) : Error("EigenSolverFailure", w) {}
};
struct NonFinite : Error {
    explicit NonFinite(const std::string& w) : Error("NonFinite", w) {}
};
struct QuadratureFailure : Error {
    explicit QuadratureFailure(const std::string& w) : Error("QuadratureFailure", w) {}
};
struct NotCritical : Error {
    explicit NotCritical(const std::string& w) : Error("NotCritical", w) {}
};
struct NotSymmetric : Error {
    explicit NotSymmetric(const std::string& w) : Error("NotSymmetric", w) {}
};
struct NegativeEigenvalue : Error {
    explicit NegativeEigenvalue(const std::string& w) : Error("NegativeEigenvalue", w) {}
};
struct SingularBtilde : Error {
    explicit SingularBtilde(const std::string& w) : Error("SingularBtilde", w) {}
};
struct StepTooLarge : Error {
    explicit StepTooLarge(const std::string& w) : Error("StepTooLarge", w) {}
};
struct GridMismatch : Error {
    explicit GridMismatch(const std::string& w) : Error("GridMismatch", w) {}
};
struct HorizonTooShort : Error {
    explicit HorizonTooShort(const std::string& w) : Error("HorizonTooShort", w) {}
};
struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& w) : Error("LengthMismatch", w) {}
};
struct EmptySample : Error {
    explicit EmptySample(const std::string& w) : Error("EmptySample", w) {}
};
struct AllZeroMass : Error {
    explicit AllZeroMass(const std::string& w) : Error("AllZeroMass", w) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error("ParseError", w) {}
};
struct FileNotFound : Error {
    explicit FileNotFound(const std::string& w) : Error("FileNotFound", w) {}
};
struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& w) : Error("InvalidArgument", w) {}
};

}  // namespace cbilab
