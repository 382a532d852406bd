#include "sqmem/trace_io.hpp"

#include "sqmem/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sqmem {

namespace {

static_assert(std::endian::native == std::endian::little, "trace files assume a little-endian host");

constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw IoError("truncated trace file " + path.string());
  }
  return v;
}

void put_samples(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_samples(std::istream& in, std::uint64_t n, const std::filesystem::path& path) {
  std::vector<double> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw IoError("truncated trace file " + path.string());
  }
  return v;
}

}  // namespace

void write_trace(const std::filesystem::path& path, const HomodyneTrace& trace) {
  trace.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("HTRC", 4);
  put(out, kVersion);
  put(out, trace.sample_rate);
  put(out, trace.lo_phase);
  put(out, static_cast<std::uint64_t>(trace.samples.size()));
  put_samples(out, trace.samples);
  if (trace.reference) {
    out.write("REFS", 4);
    put(out, trace.reference->delta_hz);
    put(out, trace.reference->phase);
    put_samples(out, trace.reference->samples);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

HomodyneTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::memcmp(magic.data(), "HTRC", 4) != 0) {
    throw IoError(path.string() + " is not a trace file");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) throw IoError("unsupported trace version " + std::to_string(version));
  HomodyneTrace trace;
  trace.sample_rate = get<double>(in, path);
  trace.lo_phase = get<double>(in, path);
  const auto n = get<std::uint64_t>(in, path);
  trace.samples = get_samples(in, n, path);
  if (in.read(magic.data(), 4)) {
    if (std::memcmp(magic.data(), "REFS", 4) != 0) throw IoError("unknown block in " + path.string());
    BeatReference ref;
    ref.delta_hz = get<double>(in, path);
    ref.phase = get<double>(in, path);
    ref.samples = get_samples(in, n, path);
    trace.reference = std::move(ref);
  } else if (in.gcount() != 0) {
    throw IoError("truncated block in " + path.string());
  }
  in.clear();
  if (in.peek() != std::ifstream::traits_type::eof()) throw IoError("trailing bytes in " + path.string());
  try {
    trace.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return trace;
}

std::string trace_to_csv(const HomodyneTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << (trace.reference ? "t,sample,reference\n" : "t,sample\n");
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    out << static_cast<double>(k) / trace.sample_rate << ',' << trace.samples[k];
    if (trace.reference) out << ',' << trace.reference->samples[k];
    out << '\n';
  }
  return out.str();
}

}  // namespace sqmem
