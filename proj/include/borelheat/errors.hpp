#pragma once

#include <stdexcept>
#include <string>

namespace borelheat {

// Input errors map to CLI exit code 2, numerical failures to exit code 3.
enum class ErrorCategory { Input, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), category_(category), name_(std::move(name)) {}

    ErrorCategory category() const noexcept { return category_; }
    const std::string& name() const noexcept { return name_; }

private:
    ErrorCategory category_;
    std::string name_;
};

#define BORELHEAT_DEFINE_ERROR(Name, Category)                                   \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& what) : Error(Category, #Name, what) {} \
    }

BORELHEAT_DEFINE_ERROR(ParseError, ErrorCategory::Input);
BORELHEAT_DEFINE_ERROR(SymmetryViolation, ErrorCategory::Input);
BORELHEAT_DEFINE_ERROR(NonPositiveGroundState, ErrorCategory::Input);
BORELHEAT_DEFINE_ERROR(MissingDerivative, ErrorCategory::Input);
BORELHEAT_DEFINE_ERROR(NonPositiveSigma, ErrorCategory::Input);
BORELHEAT_DEFINE_ERROR(OutOfImage, ErrorCategory::Input);
BORELHEAT_DEFINE_ERROR(OrderOutOfRange, ErrorCategory::Input);
BORELHEAT_DEFINE_ERROR(NormalizationDivergent, ErrorCategory::Numerical);
BORELHEAT_DEFINE_ERROR(FitDiverged, ErrorCategory::Numerical);
BORELHEAT_DEFINE_ERROR(DegreeOverflow, ErrorCategory::Numerical);
BORELHEAT_DEFINE_ERROR(AllZero, ErrorCategory::Numerical);
BORELHEAT_DEFINE_ERROR(DegenerateHankel, ErrorCategory::Numerical);
BORELHEAT_DEFINE_ERROR(PoleOnContour, ErrorCategory::Numerical);
BORELHEAT_DEFINE_ERROR(MassLoss, ErrorCategory::Numerical);

#undef BORELHEAT_DEFINE_ERROR

}  // namespace borelheat
