#pragma once

namespace mrirdlmc {

// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 input
// format or I/O error, 3 numerical failure.
int run(int argc, char** argv);

}  // namespace mrirdlmc
