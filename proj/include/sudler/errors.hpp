#pragma once

#include <stdexcept>
#include <string>

namespace sudler {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad flag/argument combinations at the CLI or config layer.  Exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

// An alpha specification that cannot denote an irrational in (0,1).
class InvalidSpecError : public Error {
public:
    using Error::Error;
};

// The working precision (or a finite-precision alpha) cannot certify the
// requested quantity.  Exit code 3.
class PrecisionExhaustedError : public Error {
public:
    using Error::Error;
};

class OutOfRangeError : public Error {
public:
    using Error::Error;
};

class InvalidDigitsError : public Error {
public:
    using Error::Error;
};

// Some n makes the argument of log|2 sin(.)| an integer within tolerance.
class SingularArgumentError : public Error {
public:
    using Error::Error;
};

// A scan or summation exceeds its configured cap.  Exit code 4.
class BudgetExceededError : public Error {
public:
    using Error::Error;
};

class EmptySetError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e)) return 2;
    if (dynamic_cast<const PrecisionExhaustedError*>(&e)) return 3;
    if (dynamic_cast<const BudgetExceededError*>(&e)) return 4;
    return 1;
}

} // namespace sudler
