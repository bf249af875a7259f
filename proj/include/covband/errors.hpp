#pragma once

#include <stdexcept>
#include <string>

namespace covband {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violated by a caller-supplied argument.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NotCertifiable : public Error {
public:
    using Error::Error;
};

class InfeasibleConstruction : public Error {
public:
    using Error::Error;
};

class NoObservations : public Error {
public:
    using Error::Error;
};

class RewardMismatch : public Error {
public:
    using Error::Error;
};

class NotApplicable : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class ConditionViolated : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace covband
