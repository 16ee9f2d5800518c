#pragma once

#include <stdexcept>
#include <string>

namespace qrdyn {

// Base class for all toolkit errors. CLI maps these to exit code 1,
// parse_error to exit code 2.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Precondition or domain violation (singular matrix, point outside the
// hemisphere square, zero input to an inverse, ...).
class domain_error : public error {
public:
    explicit domain_error(const std::string& msg) : error(msg) {}
};

// Requested inverse branch is incompatible with the input point.
class branch_error : public domain_error {
public:
    explicit branch_error(const std::string& msg) : domain_error(msg) {}
};

// Floating-range overflow along an evaluation path.
class overflow_error : public error {
public:
    explicit overflow_error(const std::string& msg) : error(msg) {}
};

// Malformed input file or command line. CLI exit code 2.
class parse_error : public error {
public:
    explicit parse_error(const std::string& msg) : error(msg) {}
};

// Numerical analysis failed (eigensolver non-convergence, >50% Newton drops).
class analysis_error : public error {
public:
    explicit analysis_error(const std::string& msg) : error(msg) {}
};

}  // namespace qrdyn
