#pragma once

#include <stdexcept>
#include <string>

namespace comove {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid parameters or configuration supplied by the caller.
class argument_error : public error {
public:
    explicit argument_error(const std::string& what) : error(what) {}
};

/// Base for problems with the input data itself.
class data_error : public error {
public:
    explicit data_error(const std::string& what) : error(what) {}
};

/// Malformed file content (bad number, bad date, missing column).
class parse_error : public data_error {
public:
    explicit parse_error(const std::string& what) : data_error(what) {}
};

/// Structurally valid input that violates a contract (duplicates, empty file,
/// non-finite values).
class validation_error : public data_error {
public:
    explicit validation_error(const std::string& what) : data_error(what) {}
};

/// File that cannot be read or written.
class io_error : public data_error {
public:
    explicit io_error(const std::string& what) : data_error(what) {}
};

/// Series that cannot be joined onto a common calendar.
class alignment_error : public data_error {
public:
    explicit alignment_error(const std::string& what) : data_error(what) {}
};

/// Degenerate or non-convergent numerical situation (singular design,
/// undefined statistic, rank loss).
class numerical_error : public error {
public:
    explicit numerical_error(const std::string& what) : error(what) {}
};

} // namespace comove
