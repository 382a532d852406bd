#pragma once

#include "sqmem/homodyne.hpp"

#include <filesystem>
#include <string>

namespace sqmem {

/// Little-endian binary trace file:
///   "HTRC" | version u32 = 1 | sample_rate f64 | theta f64 | n u64 | n × f64 samples
/// optionally followed by a reference block:
///   "REFS" | delta_hz f64 | phase f64 | n × f64 samples
/// The seed is not stored; read traces come back with seed 0.
void write_trace(const std::filesystem::path& path, const HomodyneTrace& trace);
HomodyneTrace read_trace(const std::filesystem::path& path);

/// CSV with columns t,sample and, when present, reference.
std::string trace_to_csv(const HomodyneTrace& trace);

}  // namespace sqmem
