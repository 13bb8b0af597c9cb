#pragma once

#include <stdexcept>
#include <string>

namespace vloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

class InsufficientSatellitesError : public Error {
public:
    using Error::Error;
};

class InvalidRangeError : public Error {
public:
    using Error::Error;
};

class IsolatedVehicleError : public Error {
public:
    using Error::Error;
};

class IncompleteFusionError : public Error {
public:
    using Error::Error;
};

class IncompleteReportError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace vloc
