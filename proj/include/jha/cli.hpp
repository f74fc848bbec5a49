#pragma once

#include <iosfwd>

namespace jha::cli {

// exit codes: 0 success, 1 check or precondition failure, 2 bad usage or input
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace jha::cli
