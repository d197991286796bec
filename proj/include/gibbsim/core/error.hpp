#pragma once

#include <stdexcept>
#include <string>

namespace gibbsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Image shapes do not fit the operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A scale the operation divides by is zero (all-zero image or k-space).
class DegenerateError : public Error {
public:
    using Error::Error;
};

// Partial Fourier fraction at or below one half.
class UnsupportedFraction : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ProcessorError : public Error {
public:
    using Error::Error;
};

// A half-maximum crossing is missing on one side of the line-spread peak.
class UnboundedFwhm : public Error {
public:
    using Error::Error;
};

} // namespace gibbsim
