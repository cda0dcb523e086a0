#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace ruin {

// Shortest representation that round-trips a double; stable across runs.
std::string format_double(double v);

// Writes via a temp file in the same directory plus an atomic rename, so an
// interrupted run never leaves a partial file at the target path.
void atomic_write_file(const std::string& path, const std::function<void(std::ostream&)>& writer);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace ruin
