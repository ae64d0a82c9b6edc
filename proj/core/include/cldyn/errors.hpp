#pragma once

#include <stdexcept>
#include <string>

namespace cldyn {

/// Bad user input: configs, shapes, parameter ranges. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A run blew past its overflow bound. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// File read/write failure. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cldyn
