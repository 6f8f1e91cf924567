#pragma once

#include <stdexcept>
#include <string>

namespace tristat {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input could not be parsed; message carries the line/record locus.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

// A value violates the declared domain of its variable.
struct DomainMismatch : Error {
    using Error::Error;
};

// An operation hit a missing cell it cannot tolerate.
struct MissingData : Error {
    using Error::Error;
};

// A probability is requested over an entirely-missing support.
struct EmptySupport : Error {
    using Error::Error;
};

// Profile demands structure the tensor does not have (e.g. TC on non-temporal data).
struct UnsupportedProfile : Error {
    using Error::Error;
};

// Planted triclusters overlap with contradictory categories and retries ran out.
struct PlantingConflict : Error {
    using Error::Error;
};

struct SearchSpaceTooLarge : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

}  // namespace tristat
