#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace alina
{

// Subcommands: ingest, run, eval, ablate, bench, profile-hsv, serve.
// Exit status: 0 success, 1 usage or validation error, 2 runtime failure.
int cli_run(const std::vector<std::string> &args);
int cli_run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace alina
