#ifndef TSRAG_STORE_HPP
#define TSRAG_STORE_HPP

#include <string>
#include <vector>

#include "tsrag/series.hpp"

namespace tsrag {

// Ingested-series store, file format "TSST": the cleaned univariate channels
// a run operates on, before any windowing.
void save_store(const std::vector<Series>& series, const std::string& path);
std::vector<Series> load_store(const std::string& path);

} // namespace tsrag

#endif
