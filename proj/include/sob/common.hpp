#pragma once

#include <stdexcept>
#include <string>

namespace sob {

// File/stream level failures (missing file, short read, bad magic).
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally invalid payloads, rasters or config files.
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sob
