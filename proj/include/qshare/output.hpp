#pragma once

#include "qshare/simulator.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace qshare {

/// Long-format CSV: t, ibr (1-based), then the requested channels (empty = all).
void write_csv(std::ostream& os, const TimeSeries& ts, const std::vector<std::string>& channels = {});

/// Python/matplotlib script that plots the CSV in a 4x2 panel layout.
std::string plot_script(const std::string& csv_file, const std::string& title);

}  // namespace qshare
