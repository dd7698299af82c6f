#include "logdiff/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace logdiff {

static_assert(std::endian::native == std::endian::little,
              "snapshot serialization assumes a little-endian host");

namespace {
template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ArtifactError("snapshot: truncated header");
  return v;
}
} // namespace

void write_snapshot(std::ostream& os, const ScalarField& f) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.dim));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.n));
  put<double>(os, f.grid.half_length);
  os.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!os) throw ArtifactError("snapshot: write failed");
}

ScalarField read_snapshot(std::istream& is) {
  const auto dim = get<std::uint32_t>(is);
  const auto n = get<std::uint32_t>(is);
  const auto half_length = get<double>(is);
  Grid g = make_grid(static_cast<int>(dim), static_cast<int>(n), half_length);
  ScalarField f(g);
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!is) throw ArtifactError("snapshot: truncated payload");
  return f;
}

void write_snapshot_file(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArtifactError("snapshot: cannot open " + path + " for writing");
  write_snapshot(os, f);
}

ScalarField read_snapshot_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArtifactError("snapshot: cannot open " + path);
  return read_snapshot(is);
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid;
  os << "x0";
  for (int a = 1; a < g.dim; ++a) os << ",x" << a;
  os << ",value\n";
  char buf[32];
  const int n = g.n;
  std::size_t flat = 0;
  std::vector<int> idx(g.dim, 0);
  const std::size_t total = g.point_count();
  for (flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = g.dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    for (int a = 0; a < g.dim; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", g.coordinate(idx[a]));
      os << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", f.values[flat]);
    os << buf << '\n';
  }
  if (!os) throw ArtifactError("field csv: write failed");
}

void write_field_csv_file(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw ArtifactError("field csv: cannot open " + path + " for writing");
  write_field_csv(os, f);
}

} // namespace logdiff
