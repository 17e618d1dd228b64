#ifndef TSRAG_CSV_HPP
#define TSRAG_CSV_HPP

#include <string>
#include <vector>

#include "tsrag/series.hpp"

namespace tsrag {

struct CsvLoadResult {
    Series series;
    std::size_t skipped_rows = 0; // rows dropped for NaN/Inf/unparsable values
};

// Loads one named column. The file must have a header row; values are
// decimal-point reals. Non-finite or unparsable rows are skipped and counted.
// Errors: missing file (IO), missing column or zero usable rows (FORMAT).
CsvLoadResult load_csv(const std::string& path, const std::string& column);

// Loads every value column of a file as an independent univariate series
// (id = "<stem>.<column>"). With two or more columns the first is treated as
// the timestamp column and ignored; a single-column file is all values.
std::vector<CsvLoadResult> load_csv_all(const std::string& path);

} // namespace tsrag

#endif
