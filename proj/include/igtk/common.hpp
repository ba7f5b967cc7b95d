#pragma once

#include <stdexcept>
#include <string>

#define IGTK_VERSION "1.0.0"

namespace igtk {

// Base class for all toolkit errors; `kind` is a stable machine-readable tag.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

class SingularFisher : public Error {
public:
    SingularFisher(double min_eig, const std::string& what)
        : Error("SingularFisher", what), min_eig_(min_eig) {}
    double min_eig() const { return min_eig_; }

private:
    double min_eig_;
};

class ExpectationError : public Error {
public:
    explicit ExpectationError(const std::string& what) : Error("ExpectationError", what) {}
};

class DerivativeEvaluationError : public Error {
public:
    explicit DerivativeEvaluationError(const std::string& what)
        : Error("DerivativeEvaluationError", what) {}
};

class SamplingError : public Error {
public:
    explicit SamplingError(const std::string& what) : Error("SamplingError", what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("DomainError", what) {}
};

class TangencyViolation : public Error {
public:
    explicit TangencyViolation(const std::string& what) : Error("TangencyViolation", what) {}
};

class IllConditionedFit : public Error {
public:
    explicit IllConditionedFit(const std::string& what) : Error("IllConditionedFit", what) {}
};

class OnSingularStratum : public Error {
public:
    explicit OnSingularStratum(const std::string& what) : Error("OnSingularStratum", what) {}
};

class OddLeadingOrder : public Error {
public:
    explicit OddLeadingOrder(const std::string& what) : Error("OddLeadingOrder", what) {}
};

class InvalidSpec : public Error {
public:
    explicit InvalidSpec(const std::string& what) : Error("InvalidSpec", what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error("UsageError", what) {}
};

}  // namespace igtk
