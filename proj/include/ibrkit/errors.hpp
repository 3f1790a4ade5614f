#pragma once

#include <stdexcept>
#include <string>

namespace ibrkit {

// Error taxonomy shared by the library and the CLI. The CLI maps kinds to
// exit codes: usage/config -> 1, input format -> 2, I/O -> 3.
enum class ErrorKind { usage, input_format, io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& message) { return Error(ErrorKind::usage, message); }
inline Error input_error(const std::string& message) { return Error(ErrorKind::input_format, message); }
inline Error io_error(const std::string& message) { return Error(ErrorKind::io, message); }

}  // namespace ibrkit
