#pragma once

#include <stdexcept>
#include <string>

namespace storeloc {

// Invalid configuration or command-line usage (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Input data that cannot be used: unreadable files, malformed or
// inconsistent records, too few known stores (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace storeloc
