#pragma once
// CSV emission and parsing.  All numbers print as %.17g, so
// parse(emit(x)) = x exactly; headers are fixed per table kind:
//
//   acf        tau,r_analytic[,r_empirical,ci_half_width]
//   paths      t,path_0,path_1,...
//   compare    tau,r_analytic,r_empirical,ci_half_width,r_atomized

#include <string>
#include <vector>

#include "supcar/analytics.hpp"
#include "supcar/simulate.hpp"

namespace supcar {

std::string csv_of_acf(const AcfTable& table);
std::string csv_of_paths(const PathSet& paths);
std::string csv_of_comparison(const ComparisonReport& report);

// Inverse readers (empirical columns restored when the header carries
// them).  Throw std::invalid_argument on a malformed document.
AcfTable acf_from_csv(const std::string& text);
PathSet paths_from_csv(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace supcar
