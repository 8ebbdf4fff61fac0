#pragma once

#include <stdexcept>
#include <string>

namespace pcoh {

    // bad input, bad flags, impossible partition requests
    struct ConfigError : std::runtime_error {
        using std::runtime_error::runtime_error;
    };

    // an algorithmic invariant was violated (collision at extraction, runaway loop, ...)
    struct InternalError : std::logic_error {
        using std::logic_error::logic_error;
    };

    // malformed or misrouted message, mismatched collective call
    struct ProtocolError : std::runtime_error {
        using std::runtime_error::runtime_error;
    };

} // namespace pcoh
