#pragma once

// File formats: datasets/designs as CSV with a `x1,...,xd[,f]` header, and
// domains as JSON `{ "lower": [...], "upper": [...] }`.

#include <iosfwd>
#include <string>

#include "bomm/core.hpp"

namespace bomm {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

void write_design_csv(std::ostream& os, const MatrixXd& points);
MatrixXd read_design_csv(std::istream& is);

void write_dataset_csv(std::ostream& os, const Dataset& data);
/// Expects a trailing `f` column. The positivity shift is recomputed.
Dataset read_dataset_csv(std::istream& is);

std::string domain_to_json(const Domain& dom);
Domain domain_from_json(const std::string& text);

Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Dataset& data);
Domain load_domain(const std::string& path);
void save_domain(const std::string& path, const Domain& dom);

}  // namespace bomm
