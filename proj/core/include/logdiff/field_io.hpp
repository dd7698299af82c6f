#ifndef LOGDIFF_FIELD_IO_HPP
#define LOGDIFF_FIELD_IO_HPP

#include <iosfwd>
#include <string>

#include "logdiff/grid.hpp"

namespace logdiff {

// Flat binary snapshot layout, little-endian:
//   bytes 0..3   uint32  dim
//   bytes 4..7   uint32  points per axis
//   bytes 8..15  float64 box half length L
//   then N^dim float64 values, row-major (last axis fastest).
void write_snapshot(std::ostream& os, const ScalarField& f);
ScalarField read_snapshot(std::istream& is);
void write_snapshot_file(const std::string& path, const ScalarField& f);
ScalarField read_snapshot_file(const std::string& path);

// CSV dump: header line "x0[,x1[,x2]],value", one row per grid point in
// row-major order, coordinates and values printed with %.17g.
void write_field_csv(std::ostream& os, const ScalarField& f);
void write_field_csv_file(const std::string& path, const ScalarField& f);

} // namespace logdiff

#endif
