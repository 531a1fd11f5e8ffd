#pragma once

#include <string>

#include "pmelab/grid.hpp"

namespace pmelab {

// Field files: a text header (dimension, counts, extents, stamps when the
// field is time-dependent) followed by one value per line, row-major with the
// last axis fastest, printed with 17 significant digits so doubles round-trip
// bit-exactly.
void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const TimeField& f);

struct LoadedField {
    Grid grid;  // owns the grid the field refers to
    ScalarField field;
};
struct LoadedTimeField {
    Grid grid;
    TimeField field;
};
LoadedField read_field(const std::string& path);
LoadedTimeField read_time_field(const std::string& path);

// CSV with coordinate columns then the value column(s).
void write_csv(const std::string& path, const ScalarField& f, const std::string& value_name);
void write_csv(const std::string& path, const BoundaryField& f, const std::string& value_name);

std::string format_double(double v);  // %.17g

}  // namespace pmelab
