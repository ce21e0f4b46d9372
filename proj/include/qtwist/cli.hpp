#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qtwist/io.hpp"

namespace qtwist::cli {

/// Command names accepted by run().
const std::vector<std::string>& commands();
std::string usage();

/// Dispatches a validated configuration. Results go to `config.output` (CSV,
/// appended) or to `out`; progress and warnings go to `log`. Errors propagate
/// as qtwist::Error.
void run(const io::RunConfig& config, std::ostream& out, std::ostream& log);

/// Parses `qtwist <command> [--config FILE] [key=value ...]`, runs it and maps
/// errors to exit codes (usage 2, config 3, capacity 4, fixture 5, data 6,
/// domain 7, other 1).
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qtwist::cli
