#include "lpdl/matrix_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lpdl {

namespace {

const Json& require_field(const Json& j, const char* field) {
    if (!j.is_object() || !j.contains(field))
        throw std::invalid_argument(std::string("missing field '") + field + "'");
    return j.at(field);
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (unsigned char c : s)
        if (!std::isdigit(c)) return false;
    return true;
}

Json legs_to_json(const std::vector<IndexFactor>& legs, const std::string& group_literal) {
    Json out = Json::array();
    for (const auto& leg : legs) {
        std::string token = std::to_string(leg.size);
        if (!group_literal.empty() && (leg.name == "G" || leg.name == "Gd")) {
            if (FiniteAbelianGroup::parse(group_literal).order() != leg.size)
                throw std::invalid_argument("group literal '" + group_literal +
                                            "' does not match a leg of size " +
                                            std::to_string(leg.size));
            token = group_literal;
        }
        out.push_back(leg.name + ":" + token);
    }
    return out;
}

std::vector<IndexFactor> legs_from_json(const Json& j, const char* field) {
    if (!j.is_array())
        throw std::invalid_argument(std::string(field) + " must be an array of \"name:size\"");
    std::vector<IndexFactor> legs;
    for (const auto& item : j) {
        if (!item.is_string())
            throw std::invalid_argument(std::string(field) + " entries must be strings");
        const std::string s = item.get<std::string>();
        const auto colon = s.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
            throw std::invalid_argument("bad leg '" + s + "': expected \"name:size\"");
        const std::string name = s.substr(0, colon);
        const std::string token = s.substr(colon + 1);
        int size = 0;
        if (all_digits(token))
            size = std::stoi(token);
        else
            size = FiniteAbelianGroup::parse(token).order();
        if (size < 1) throw std::invalid_argument("bad leg '" + s + "': size must be >= 1");
        legs.push_back({name, size});
    }
    return legs;
}

double number_field(const Json& j, const char* field) {
    const Json& v = require_field(j, field);
    if (!v.is_number()) throw std::invalid_argument(std::string(field) + " must be a number");
    return v.get<double>();
}

}  // namespace

Json complex_to_json(const Cplx& z) { return Json::array({z.real(), z.imag()}); }

Cplx complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::invalid_argument("complex entries must be [re, im] number pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

Json cmatrix_to_json(const CMatrix& a) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(complex_to_json(a(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix cmatrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw std::invalid_argument("matrix rows must be non-empty arrays");
    CMatrix a(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw std::invalid_argument("matrix rows must all have the same length");
        for (std::size_t c = 0; c < cols; ++c)
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                complex_from_json(j[r][c]);
    }
    return a;
}

std::string coords_key(const GroupElement& t) {
    std::string out = "(";
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (j) out += ',';
        out += std::to_string(t[j]);
    }
    out += ')';
    return out;
}

GroupElement coords_from_key(const std::string& key) {
    if (key.size() < 2 || key.front() != '(' || key.back() != ')')
        throw std::invalid_argument("bad coordinate key '" + key + "': expected \"(a,b,...)\"");
    GroupElement t;
    std::string body = key.substr(1, key.size() - 2);
    if (body.empty()) return t;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            t.push_back(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad coordinate key '" + key + "': '" + item +
                                        "' is not an integer");
        }
    }
    return t;
}

Json operator_to_json(const LabeledOperator& op, const std::string& group_literal) {
    Json j;
    j["rows"] = op.mat.rows();
    j["cols"] = op.mat.cols();
    Json entries = Json::array();
    for (Eigen::Index r = 0; r < op.mat.rows(); ++r)
        for (Eigen::Index c = 0; c < op.mat.cols(); ++c)
            entries.push_back(complex_to_json(op.mat(r, c)));
    j["entries"] = std::move(entries);
    j["row_space"] = legs_to_json(op.row_space, group_literal);
    j["col_space"] = legs_to_json(op.col_space, group_literal);
    j["p"] = op.p;
    return j;
}

LabeledOperator operator_from_json(const Json& j) {
    const auto rows = static_cast<Eigen::Index>(number_field(j, "rows"));
    const auto cols = static_cast<Eigen::Index>(number_field(j, "cols"));
    if (rows < 1 || cols < 1) throw std::invalid_argument("rows and cols must be >= 1");
    const Json& entries = require_field(j, "entries");
    if (!entries.is_array() || entries.size() != static_cast<std::size_t>(rows * cols))
        throw std::invalid_argument("entries must hold rows*cols [re, im] pairs");
    CMatrix a(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = complex_from_json(entries[k++]);
    auto row_space = legs_from_json(require_field(j, "row_space"), "row_space");
    auto col_space = legs_from_json(require_field(j, "col_space"), "col_space");
    if (factor_dim(row_space) != rows)
        throw std::invalid_argument("row_space sizes do not multiply to rows");
    if (factor_dim(col_space) != cols)
        throw std::invalid_argument("col_space sizes do not multiply to cols");
    const double p = number_field(j, "p");
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("p must be a finite number >= 1");
    return LabeledOperator(std::move(a), std::move(row_space), std::move(col_space), p);
}

Json cc_element_to_json(const CcElement& f) {
    Json j;
    j["group"] = f.group().literal();
    j["action"] = f.action.literal();
    Json coeffs = Json::object();
    for (const auto& t : f.group().elements()) coeffs[coords_key(t)] = cmatrix_to_json(f.at(t));
    j["coeffs"] = std::move(coeffs);
    return j;
}

namespace {

GroupAction action_from_header(const Json& j, int degree) {
    const Json& group_field = require_field(j, "group");
    const Json& action_field = require_field(j, "action");
    if (!group_field.is_string() || !action_field.is_string())
        throw std::invalid_argument("group and action must be literal strings");
    const FiniteAbelianGroup group = FiniteAbelianGroup::parse(group_field.get<std::string>());
    return GroupAction::parse(group, degree, action_field.get<std::string>());
}

int degree_from_coeffs(const Json& coeffs) {
    if (!coeffs.is_object() || coeffs.empty())
        throw std::invalid_argument(
            "coeffs must be a non-empty object (the matrix degree is inferred from it)");
    const CMatrix first = cmatrix_from_json(coeffs.begin().value());
    if (first.rows() != first.cols())
        throw std::invalid_argument("coefficients must be square matrices");
    return static_cast<int>(first.rows());
}

}  // namespace

CcElement cc_element_from_json(const Json& j) {
    const Json& coeffs = require_field(j, "coeffs");
    const int n = degree_from_coeffs(coeffs);
    CcElement f(action_from_header(j, n));
    for (auto it = coeffs.begin(); it != coeffs.end(); ++it) {
        const CMatrix a = cmatrix_from_json(it.value());
        if (a.rows() != n || a.cols() != n)
            throw std::invalid_argument("coefficient at " + it.key() + " is not " +
                                        std::to_string(n) + "x" + std::to_string(n));
        f.at(f.group().reduce(coords_from_key(it.key()))) = a;
    }
    return f;
}

Json double_element_to_json(const DoubleCcElement& f) {
    Json j;
    const auto& g = f.action.group();
    j["group"] = g.literal();
    j["action"] = f.action.literal();
    Json coeffs = Json::object();
    for (const auto& gamma : f.dual.elements())
        for (const auto& s : g.elements())
            coeffs[coords_key(gamma) + "|" + coords_key(s)] = cmatrix_to_json(f.at(gamma, s));
    j["coeffs"] = std::move(coeffs);
    return j;
}

DoubleCcElement double_element_from_json(const Json& j) {
    const Json& coeffs = require_field(j, "coeffs");
    const int n = degree_from_coeffs(coeffs);
    DoubleCcElement f(action_from_header(j, n));
    const auto& g = f.action.group();
    for (auto it = coeffs.begin(); it != coeffs.end(); ++it) {
        const std::string& key = it.key();
        const auto bar = key.find('|');
        if (bar == std::string::npos)
            throw std::invalid_argument("bad key '" + key + "': expected \"(gamma)|(s)\"");
        const GroupElement gamma = f.dual.reduce(coords_from_key(key.substr(0, bar)));
        const GroupElement s = g.reduce(coords_from_key(key.substr(bar + 1)));
        const CMatrix a = cmatrix_from_json(it.value());
        if (a.rows() != n || a.cols() != n)
            throw std::invalid_argument("coefficient at " + key + " is not " + std::to_string(n) +
                                        "x" + std::to_string(n));
        f.at(gamma, s) = a;
    }
    return f;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("malformed JSON in '" + path + "': " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

}  // namespace lpdl
