#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "platecount/tiler.hpp"

namespace platecount::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point behind the `platecount` binary. Subcommands: validate,
/// convert, tile, merge, eval-detection, eval-counting, tune, stats, synth.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "start:stop:step".
std::vector<double> parse_range(const std::string& spec);

/// Reads "sample_id,width,height" rows; a non-numeric first row is a header.
std::map<long, ImageExtent> parse_extents_csv(const std::string& text);

/// Worker count from PLATE_PIPELINE_THREADS, defaulting to 1.
unsigned thread_cap();

}  // namespace platecount::cli
