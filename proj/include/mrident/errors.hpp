#pragma once

#include <stdexcept>
#include <string>

namespace mrident {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A length/factor divisibility precondition failed (F must divide N).
class NotDivisible : public Error {
public:
    NotDivisible(long n, int factor)
        : Error("length " + std::to_string(n) + " is not divisible by factor " +
                std::to_string(factor)) {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// zI - A numerically singular at the requested frequency.
class SingularResolvent : public Error {
public:
    using Error::Error;
};

/// I + K_l P_l numerically singular at some bin.
class SingularSensitivity : public Error {
public:
    using Error::Error;
};

class WrongKind : public Error {
public:
    using Error::Error;
};

/// Requested frequency does not land on the DFT bin grid.
class OffGrid : public Error {
public:
    using Error::Error;
};

class BadIndex : public Error {
public:
    using Error::Error;
};

class OffUnitCircle : public Error {
public:
    using Error::Error;
};

/// LPM window/order fails the identifiability inequality.
class NotIdentifiable : public Error {
public:
    using Error::Error;
};

class UnstableLoop : public Error {
public:
    using Error::Error;
};

class ZeroInput : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class SingularS : public Error {
public:
    using Error::Error;
};

class IngestError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace mrident
