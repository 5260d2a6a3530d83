#ifndef SEQMARK_ERROR_HPP
#define SEQMARK_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqmark {

enum class ErrorKind {
    InvalidArgument,
    OutOfRange,
    LengthMismatch,
    DuplicateSp,
    Infeasible,
    TooLarge,
    Insufficient,
    Parse,
    Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can print a
// machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace seqmark

#endif  // SEQMARK_ERROR_HPP
