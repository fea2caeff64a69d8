#pragma once

#include <filesystem>
#include <iosfwd>

#include "itg/environment.hpp"

namespace itg {

// JSON Lines: a header record with the config, goal and policy name, one
// record per turn {h, actor, draft, edits, score, budget_left}, then an end
// record with status, T, final score and reward. The IDF table itself is not
// stored; readers get an empty pointer and must reattach one.
void write_trace(std::ostream& out, const SessionTrace& trace);
SessionTrace read_trace(std::istream& in);

void save_trace(const std::filesystem::path& path, const SessionTrace& trace);
SessionTrace load_trace(const std::filesystem::path& path);

}  // namespace itg
