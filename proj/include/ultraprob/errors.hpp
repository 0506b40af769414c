#pragma once

#include <stdexcept>
#include <string>

namespace ultraprob {

// Error taxonomy. The three intermediate classes map onto the CLI exit codes:
// InputError -> 2, PrecisionError -> 3, PreconditionError -> 4.
// InvariantViolation is never expected; it signals a broken theorem check.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class PrecisionError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class InvariantViolation : public Error {
public:
    using Error::Error;
};

#define ULTRAPROB_DEFINE_ERROR(Name, Base)                                   \
    class Name : public Base {                                               \
    public:                                                                  \
        explicit Name(const std::string& what) : Base(#Name ": " + what) {}  \
    };

ULTRAPROB_DEFINE_ERROR(ZeroDenominator, InputError)
ULTRAPROB_DEFINE_ERROR(DivisionByZero, InputError)
ULTRAPROB_DEFINE_ERROR(ContextMismatch, InputError)
ULTRAPROB_DEFINE_ERROR(InvalidContext, InputError)
ULTRAPROB_DEFINE_ERROR(SpaceMismatch, InputError)
ULTRAPROB_DEFINE_ERROR(PartitionMismatch, InputError)
ULTRAPROB_DEFINE_ERROR(InvalidSpace, InputError)
ULTRAPROB_DEFINE_ERROR(InvalidPartition, InputError)
ULTRAPROB_DEFINE_ERROR(InvalidFiltration, InputError)
ULTRAPROB_DEFINE_ERROR(InvalidStoppingTime, InputError)
ULTRAPROB_DEFINE_ERROR(InvalidTransitionMatrix, InputError)
ULTRAPROB_DEFINE_ERROR(HorizonExceeded, InputError)
ULTRAPROB_DEFINE_ERROR(SchemaError, InputError)

ULTRAPROB_DEFINE_ERROR(PrecisionUnderflow, PrecisionError)
ULTRAPROB_DEFINE_ERROR(IndistinguishableAtPrecision, PrecisionError)

ULTRAPROB_DEFINE_ERROR(ZeroNotInExpectation, PreconditionError)
ULTRAPROB_DEFINE_ERROR(OneNotInExpectation, PreconditionError)
ULTRAPROB_DEFINE_ERROR(NotHarmonic, PreconditionError)

#undef ULTRAPROB_DEFINE_ERROR

}  // namespace ultraprob
