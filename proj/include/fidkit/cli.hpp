#pragma once

#include <iosfwd>

namespace fidkit::cli {

// Full command-line entry point. Exit codes: 0 success, 2 awaiting-decode
// (the ifid real-mode handshake), 1 any error.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace fidkit::cli
