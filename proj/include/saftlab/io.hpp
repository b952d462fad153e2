#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "saftlab/grid.hpp"
#include "saftlab/params.hpp"

namespace saftlab::io {

using nlohmann::json;

/// "SAFTGRID v1" text format: header lines `n`, `shape`, `origin`,
/// `spacing` and optionally `frame` (row-major n*n), then one "re,im" row per
/// sample in row-major order.
void write_grid(std::ostream& os, const GridFn& f);
void write_grid(const std::string& path, const GridFn& f);
GridFn read_grid(std::istream& is);
GridFn read_grid(const std::string& path);

/// Rows "k1,...,kn,re,im". Lines starting with '#' or a letter are skipped.
void write_seq(std::ostream& os, const SeqFn& s);
void write_seq(const std::string& path, const SeqFn& s);
SeqFn read_seq(std::istream& is, int n = 0);
SeqFn read_seq(const std::string& path, int n = 0);

/// Rows "j,k1,...,kn,re,im"; returns one sequence per level j.
void write_measurements(const std::string& path, const std::vector<SeqFn>& levels);
std::vector<SeqFn> read_measurements(const std::string& path);

/// Either the explicit block {"n","A","B","C","D","P","Q"} or a preset:
/// {"preset": "ft", "n": 2}, {"preset": "frft", "theta": [...]},
/// {"preset": "lct", "A".."D"}, {"preset": "separable_lct", "a".."d"},
/// {"preset": "fresnel", "B"}, {"preset": "separable_fresnel", "b"},
/// {"preset": "lorentz", "phi": [...]}. An optional "tol" overrides the
/// constraint tolerance of explicit blocks.
SaftParams params_from_json(const json& j, double tol = kDefaultConstraintTol);
SaftParams read_params(const std::string& path, double tol = kDefaultConstraintTol);
json params_to_json(const SaftParams& p);
SaftMatrices matrices_from_json(const json& j);

IMat int_matrix_from_json(const json& j);
/// Accepts JSON text such as "[[2,0],[0,2]]".
IMat parse_int_matrix(const std::string& text);

void write_json(const std::string& path, const json& j);

} // namespace saftlab::io
