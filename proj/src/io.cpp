#include "saftlab/io.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace saftlab::io {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw StructuralError("cannot open '" + path + "' for reading");
    return is;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw StructuralError("cannot open '" + path + "' for writing");
    os << std::setprecision(17);
    return os;
}

std::vector<double> split_numbers(const std::string& line, char sep) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string tok;
    if (sep == ' ') {
        while (ss >> tok) out.push_back(std::stod(tok));
    } else {
        while (std::getline(ss, tok, sep)) out.push_back(std::stod(tok));
    }
    return out;
}

bool skip_line(const std::string& line) {
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos) return true;
    const char c = line[p];
    return c == '#' || std::isalpha(static_cast<unsigned char>(c));
}

RMat matrix(const json& j, const char* key, int n) {
    if (!j.contains(key)) throw StructuralError(std::string("params: missing ") + key);
    const auto& a = j.at(key);
    if (!a.is_array() || static_cast<int>(a.size()) != n) throw StructuralError(std::string("params: ") + key + " must be n x n");
    RMat m(n, n);
    for (int r = 0; r < n; ++r) {
        if (!a[r].is_array() || static_cast<int>(a[r].size()) != n)
            throw StructuralError(std::string("params: ") + key + " must be n x n");
        for (int c = 0; c < n; ++c) m(r, c) = a[r][c].get<double>();
    }
    return m;
}

RVec vector_or_zero(const json& j, const char* key, int n) {
    if (!j.contains(key)) return RVec::Zero(n);
    const auto v = j.at(key).get<std::vector<double>>();
    if (static_cast<int>(v.size()) != n) throw StructuralError(std::string("params: ") + key + " must have length n");
    return Eigen::Map<const RVec>(v.data(), n);
}

json matrix_json(const RMat& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        a.push_back(row);
    }
    return a;
}

int infer_n(const json& j) {
    if (j.contains("n")) return j.at("n").get<int>();
    if (j.contains("A")) return static_cast<int>(j.at("A").size());
    throw StructuralError("params: cannot determine dimension n");
}

} // namespace

void write_grid(std::ostream& os, const GridFn& f) {
    const auto& s = f.spec;
    os << std::setprecision(17);
    os << "SAFTGRID v1\n";
    os << "n " << s.n() << "\n";
    os << "shape";
    for (auto v : s.shape) os << ' ' << v;
    os << "\norigin";
    for (auto v : s.origin) os << ' ' << v;
    os << "\nspacing";
    for (auto v : s.spacing) os << ' ' << v;
    os << "\n";
    if (!s.identity_frame()) {
        os << "frame";
        for (Eigen::Index r = 0; r < s.frame.rows(); ++r)
            for (Eigen::Index c = 0; c < s.frame.cols(); ++c) os << ' ' << s.frame(r, c);
        os << "\n";
    }
    for (const auto& v : f.values) os << v.real() << ',' << v.imag() << '\n';
}

void write_grid(const std::string& path, const GridFn& f) {
    auto os = open_out(path);
    write_grid(os, f);
}

GridFn read_grid(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("SAFTGRID v1", 0) != 0)
        throw StructuralError("grid file: missing 'SAFTGRID v1' header");
    int n = 0;
    GridSpec s;
    std::vector<cplx> values;
    std::vector<double> frame;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.find(',') != std::string::npos) {
            const auto nums = split_numbers(line, ',');
            if (nums.size() != 2) throw StructuralError("grid file: data rows must be 're,im'");
            values.emplace_back(nums[0], nums[1]);
            continue;
        }
        std::stringstream ss(line);
        std::string key;
        ss >> key;
        std::string rest;
        std::getline(ss, rest);
        const auto nums = split_numbers(rest, ' ');
        if (key == "n") n = static_cast<int>(nums.at(0));
        else if (key == "shape") for (double v : nums) s.shape.push_back(static_cast<std::size_t>(v));
        else if (key == "origin") s.origin = nums;
        else if (key == "spacing") s.spacing = nums;
        else if (key == "frame") frame = nums;
        else throw StructuralError("grid file: unknown header key '" + key + "'");
    }
    if (n <= 0 || static_cast<int>(s.shape.size()) != n) throw StructuralError("grid file: n and shape disagree");
    s.frame = RMat::Identity(n, n);
    if (!frame.empty()) {
        if (static_cast<int>(frame.size()) != n * n) throw StructuralError("grid file: frame needs n*n entries");
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) s.frame(r, c) = frame[static_cast<std::size_t>(r * n + c)];
    }
    return GridFn(std::move(s), std::move(values));
}

GridFn read_grid(const std::string& path) {
    auto is = open_in(path);
    return read_grid(is);
}

void write_seq(std::ostream& os, const SeqFn& s) {
    os << std::setprecision(17);
    for (int a = 0; a < s.n(); ++a) os << 'k' << (a + 1) << ',';
    os << "re,im\n";
    for (const auto& [k, v] : s.entries()) {
        for (auto c : k) os << c << ',';
        os << v.real() << ',' << v.imag() << '\n';
    }
}

void write_seq(const std::string& path, const SeqFn& s) {
    auto os = open_out(path);
    write_seq(os, s);
}

SeqFn read_seq(std::istream& is, int n) {
    std::string line;
    std::vector<std::pair<IntVec, cplx>> rows;
    while (std::getline(is, line)) {
        if (skip_line(line)) continue;
        const auto nums = split_numbers(line, ',');
        if (nums.size() < 3) throw StructuralError("sequence file: rows need k1..kn,re,im");
        const int d = static_cast<int>(nums.size()) - 2;
        if (n == 0) n = d;
        if (d != n) throw StructuralError("sequence file: inconsistent row length");
        IntVec k;
        for (int a = 0; a < d; ++a) k.push_back(std::llround(nums[static_cast<std::size_t>(a)]));
        rows.emplace_back(std::move(k), cplx(nums[nums.size() - 2], nums.back()));
    }
    if (n == 0) throw StructuralError("sequence file: empty and no dimension given");
    SeqFn s(n);
    for (auto& [k, v] : rows) s.add(k, v);
    return s;
}

SeqFn read_seq(const std::string& path, int n) {
    auto is = open_in(path);
    return read_seq(is, n);
}

void write_measurements(const std::string& path, const std::vector<SeqFn>& levels) {
    auto os = open_out(path);
    if (levels.empty()) throw StructuralError("measurements: nothing to write");
    os << 'j';
    for (int a = 0; a < levels[0].n(); ++a) os << ",k" << (a + 1);
    os << ",re,im\n";
    for (std::size_t j = 0; j < levels.size(); ++j) {
        for (const auto& [k, v] : levels[j].entries()) {
            os << j;
            for (auto c : k) os << ',' << c;
            os << ',' << v.real() << ',' << v.imag() << '\n';
        }
    }
}

std::vector<SeqFn> read_measurements(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    std::vector<SeqFn> levels;
    int n = 0;
    while (std::getline(is, line)) {
        if (skip_line(line)) continue;
        const auto nums = split_numbers(line, ',');
        if (nums.size() < 4) throw StructuralError("measurements: rows need j,k1..kn,re,im");
        const int d = static_cast<int>(nums.size()) - 3;
        if (n == 0) n = d;
        if (d != n) throw StructuralError("measurements: inconsistent row length");
        const auto j = static_cast<std::size_t>(std::llround(nums[0]));
        while (levels.size() <= j) levels.emplace_back(n);
        IntVec k;
        for (int a = 0; a < d; ++a) k.push_back(std::llround(nums[static_cast<std::size_t>(a + 1)]));
        levels[j].add(k, cplx(nums[nums.size() - 2], nums.back()));
    }
    if (levels.empty()) throw StructuralError("measurements: file has no rows");
    return levels;
}

SaftMatrices matrices_from_json(const json& j) {
    const int n = infer_n(j);
    if (n <= 0) throw StructuralError("params: n must be positive");
    return SaftMatrices{matrix(j, "A", n), matrix(j, "B", n), matrix(j, "C", n), matrix(j, "D", n),
                        vector_or_zero(j, "P", n), vector_or_zero(j, "Q", n)};
}

SaftParams params_from_json(const json& j, double tol) {
    if (!j.is_object()) throw StructuralError("params: expected a JSON object");
    if (j.contains("tol")) tol = j.at("tol").get<double>();
    if (!j.contains("preset")) return SaftParams::from_matrices(matrices_from_json(j), tol);
    const auto kind = j.at("preset").get<std::string>();
    auto list = [&](const char* key) {
        if (!j.contains(key)) throw StructuralError("params: preset '" + kind + "' needs '" + key + "'");
        return j.at(key).get<std::vector<double>>();
    };
    if (kind == "ft") return presets::fourier(j.value("n", 1));
    if (kind == "frft") return presets::fractional(list("theta"));
    if (kind == "lorentz") return presets::lorentz(list("phi"));
    if (kind == "separable_fresnel") return presets::separable_fresnel(list("b"));
    if (kind == "separable_lct") return presets::separable_lct(list("a"), list("b"), list("c"), list("d"));
    if (kind == "fresnel") {
        const int n = j.contains("n") ? j.at("n").get<int>() : static_cast<int>(j.at("B").size());
        return presets::fresnel(matrix(j, "B", n));
    }
    if (kind == "lct") {
        const int n = infer_n(j);
        return presets::lct(matrix(j, "A", n), matrix(j, "B", n), matrix(j, "C", n), matrix(j, "D", n));
    }
    if (kind == "custom") return presets::custom(matrices_from_json(j));
    throw StructuralError("params: unknown preset '" + kind + "'");
}

SaftParams read_params(const std::string& path, double tol) {
    auto is = open_in(path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw StructuralError("params file '" + path + "': " + e.what());
    }
    return params_from_json(j, tol);
}

json params_to_json(const SaftParams& p) {
    json j;
    j["n"] = p.n();
    j["A"] = matrix_json(p.A());
    j["B"] = matrix_json(p.B());
    j["C"] = matrix_json(p.C());
    j["D"] = matrix_json(p.D());
    j["P"] = std::vector<double>(p.P().data(), p.P().data() + p.n());
    j["Q"] = std::vector<double>(p.Q().data(), p.Q().data() + p.n());
    return j;
}

IMat int_matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw StructuralError("integer matrix: expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    IMat M(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != n)
            throw StructuralError("integer matrix: must be square");
        for (Eigen::Index c = 0; c < n; ++c) {
            if (!j[r][c].is_number_integer()) throw StructuralError("integer matrix: entries must be integers");
            M(r, c) = j[r][c].get<std::int64_t>();
        }
    }
    return M;
}

IMat parse_int_matrix(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw StructuralError("cannot parse matrix '" + text + "': " + e.what());
    }
    return int_matrix_from_json(j);
}

void write_json(const std::string& path, const json& j) {
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

} // namespace saftlab::io
