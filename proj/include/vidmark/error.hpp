#ifndef VIDMARK_ERROR_HPP
#define VIDMARK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vidmark {

// Every failure the library can report, one category per error family.
// The CLI maps categories onto its stable exit codes.
enum class ErrorCode {
    BadFormat,    // malformed input (magic, header grammar, payload layout)
    Unsupported,  // recognized but out-of-contract (colorspace tag, maxval)
    Truncated,    // stream ended inside a declared payload
    Capacity,     // payload does not fit the host
    Parameter,    // invalid argument value
    Dimension,    // shape mismatch or disallowed dimensions
    Domain,       // numeric domain violation (NaN/Inf, negative input)
    SemiBlind,    // diagonal scheme invoked without its reference sidecar
    Auth,         // key check tag did not verify
    Lockout,      // asset locked after repeated failed trials
    Degenerate,   // operation produced an empty/unusable result
    Io,           // file or stream I/O failure
    Internal,     // invariant breach inside the library
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace vidmark

#endif
