#include "lpdl/action.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace lpdl {

namespace {

constexpr double kTol = 1e-12;

bool is_scalar_matrix(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    CMatrix diff = m - m(0, 0) * CMatrix::Identity(m.rows(), m.cols());
    return diff.cwiseAbs().maxCoeff() <= tol;
}

void check_phased_permutation(const CMatrix& m, int degree, const std::string& what) {
    if (m.rows() != degree || m.cols() != degree)
        throw std::invalid_argument(what + ": implementer is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", expected degree " +
                                    std::to_string(degree));
    for (int i = 0; i < degree; ++i) {
        int row_hits = 0, col_hits = 0;
        for (int j = 0; j < degree; ++j) {
            double rij = std::abs(m(i, j)), rji = std::abs(m(j, i));
            if (rij > kTol) {
                ++row_hits;
                if (std::abs(rij - 1.0) > kTol)
                    throw std::invalid_argument(what + ": entry modulus " + std::to_string(rij) +
                                                " is not 1");
            }
            if (rji > kTol) ++col_hits;
        }
        if (row_hits != 1 || col_hits != 1)
            throw std::invalid_argument(what +
                                        ": not a phased permutation (row/column support != 1)");
    }
}

CMatrix matrix_power(const CMatrix& m, int k) {
    CMatrix out = CMatrix::Identity(m.rows(), m.cols());
    for (int i = 0; i < k; ++i) out = out * m;
    return out;
}

// --- literal parsing ---------------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

// Parses cycle notation like "(0 1)(2 3)" or "()" into a permutation sigma of
// {0..degree-1}, where a cycle (c0 c1 ... cm) sends c0 -> c1 -> ... -> c0.
std::vector<int> parse_cycles(const std::string& text, int degree, const std::string& what) {
    std::vector<int> sigma(degree);
    for (int i = 0; i < degree; ++i) sigma[i] = i;
    std::vector<bool> moved(degree, false);

    size_t pos = 0;
    bool any = false;
    while (pos < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
            continue;
        }
        if (text[pos] != '(')
            throw std::invalid_argument(what + ": expected '(' in cycle notation, got '" +
                                        text.substr(pos) + "'");
        size_t close = text.find(')', pos);
        if (close == std::string::npos)
            throw std::invalid_argument(what + ": unbalanced '(' in cycle notation");
        std::string inner = text.substr(pos + 1, close - pos - 1);
        pos = close + 1;
        any = true;

        std::vector<int> cycle;
        std::istringstream in(inner);
        std::string tok;
        while (in >> tok) {
            if (!tok.empty() && tok.back() == ',') tok.pop_back();
            if (tok.empty()) continue;
            size_t used = 0;
            int v = std::stoi(tok, &used);
            if (used != tok.size())
                throw std::invalid_argument(what + ": bad cycle entry '" + tok + "'");
            if (v < 0 || v >= degree)
                throw std::invalid_argument(what + ": cycle entry " + std::to_string(v) +
                                            " outside [0," + std::to_string(degree) + ")");
            if (moved[v])
                throw std::invalid_argument(what + ": index " + std::to_string(v) +
                                            " appears twice");
            moved[v] = true;
            cycle.push_back(v);
        }
        for (size_t k = 0; k < cycle.size(); ++k) sigma[cycle[k]] = cycle[(k + 1) % cycle.size()];
    }
    if (!any) throw std::invalid_argument(what + ": empty cycle segment; use \"()\" for identity");
    return sigma;
}

// Phase given as a rational multiple of a full turn: "a/b", an integer, or a
// decimal.  Rational input stays bit-exact through unit_root.
Cplx parse_phase(const std::string& tok, const std::string& what) {
    size_t slash = tok.find('/');
    try {
        if (slash != std::string::npos) {
            long num = std::stol(tok.substr(0, slash));
            long den = std::stol(tok.substr(slash + 1));
            if (den == 0) throw std::invalid_argument("zero denominator");
            return unit_root(num, den);
        }
        size_t used = 0;
        double r = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("trailing characters");
        if (r == std::floor(r)) return unit_root(static_cast<long>(r), 1);
        return Cplx(std::cos(2.0 * M_PI * r), std::sin(2.0 * M_PI * r));
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": bad phase '" + tok + "'");
    }
}

CMatrix segment_to_matrix(const std::string& segment, int degree, bool allow_phases,
                          const std::string& what) {
    std::string cycles_text = segment;
    std::vector<Cplx> phases(degree, Cplx(1.0, 0.0));
    size_t at = segment.find('@');
    if (at != std::string::npos) {
        if (!allow_phases)
            throw std::invalid_argument(what + ": phase list not allowed under \"perm:\"");
        cycles_text = segment.substr(0, at);
        std::vector<std::string> toks = split(segment.substr(at + 1), ',');
        if (static_cast<int>(toks.size()) != degree)
            throw std::invalid_argument(what + ": phase list has " + std::to_string(toks.size()) +
                                        " entries, expected " + std::to_string(degree));
        for (int k = 0; k < degree; ++k) phases[k] = parse_phase(toks[k], what);
    }
    std::vector<int> sigma = parse_cycles(cycles_text, degree, what);
    CMatrix v = CMatrix::Zero(degree, degree);
    for (int c = 0; c < degree; ++c) v(sigma[c], c) = phases[sigma[c]];
    return v;
}

}  // namespace

GroupAction::GroupAction(FiniteAbelianGroup group, int degree)
    : group_(std::move(group)), degree_(degree), literal_("trivial") {
    if (degree_ < 1) throw std::invalid_argument("action degree must be >= 1");
    generators_.assign(group_.factors().size(), CMatrix::Identity(degree_, degree_));
    finish_construction();
}

GroupAction::GroupAction(FiniteAbelianGroup group, int degree, std::vector<CMatrix> generators)
    : group_(std::move(group)), degree_(degree), generators_(std::move(generators)) {
    if (degree_ < 1) throw std::invalid_argument("action degree must be >= 1");
    finish_construction();

    // Synthesized literal: phased segments with decimal phases, one per factor.
    if (trivial_) {
        literal_ = "trivial";
    } else {
        std::ostringstream out;
        out << "phased:";
        for (size_t j = 0; j < generators_.size(); ++j) {
            if (j) out << ";";
            const CMatrix& v = generators_[j];
            std::vector<int> sigma(degree_);
            std::vector<Cplx> phase(degree_);
            for (int c = 0; c < degree_; ++c)
                for (int r = 0; r < degree_; ++r)
                    if (std::abs(v(r, c)) > kTol) sigma[c] = r, phase[r] = v(r, c);
            std::vector<bool> seen(degree_, false);
            bool wrote_cycle = false;
            for (int start = 0; start < degree_; ++start) {
                if (seen[start] || sigma[start] == start) continue;
                out << "(";
                int c = start;
                bool first = true;
                while (!seen[c]) {
                    seen[c] = true;
                    out << (first ? "" : " ") << c;
                    first = false;
                    c = sigma[c];
                }
                out << ")";
                wrote_cycle = true;
            }
            if (!wrote_cycle) out << "()";
            out << "@";
            for (int k = 0; k < degree_; ++k) {
                double r = std::arg(phase[k]) / (2.0 * M_PI);
                out << (k ? "," : "") << r;
            }
        }
        literal_ = out.str();
    }
}

void GroupAction::finish_construction() {
    const auto& factors = group_.factors();
    if (generators_.size() != factors.size())
        throw std::invalid_argument("action has " + std::to_string(generators_.size()) +
                                    " generators, group " + group_.literal() + " has " +
                                    std::to_string(factors.size()) + " factors");
    for (size_t j = 0; j < generators_.size(); ++j)
        check_phased_permutation(generators_[j], degree_,
                                 "action generator " + std::to_string(j));

    // The recipe u_t = prod v_j^{t_j} implements an action of the group exactly
    // when each v_j^{n_j} is scalar and the generators commute up to scalars.
    for (size_t j = 0; j < generators_.size(); ++j) {
        if (!is_scalar_matrix(matrix_power(generators_[j], factors[j]), kTol))
            throw std::invalid_argument("action generator " + std::to_string(j) +
                                        " does not have order dividing " +
                                        std::to_string(factors[j]) + " modulo scalars");
        for (size_t i = 0; i < j; ++i) {
            CMatrix comm = generators_[i] * generators_[j] * generators_[i].adjoint() *
                           generators_[j].adjoint();
            if (!is_scalar_matrix(comm, kTol))
                throw std::invalid_argument("action generators " + std::to_string(i) + " and " +
                                            std::to_string(j) + " do not commute modulo scalars");
        }
    }

    trivial_ = true;
    for (const CMatrix& v : generators_)
        if (!is_scalar_matrix(v, kTol)) trivial_ = false;

    implementers_.reserve(group_.order());
    for (const GroupElement& t : group_.elements()) {
        CMatrix u = CMatrix::Identity(degree_, degree_);
        for (size_t j = 0; j < generators_.size(); ++j) u = u * matrix_power(generators_[j], t[j]);
        implementers_.push_back(std::move(u));
    }
}

GroupAction GroupAction::parse(const FiniteAbelianGroup& group, int degree,
                               const std::string& literal) {
    if (literal == "trivial") return GroupAction(group, degree);

    bool phased = false;
    std::string rest;
    if (literal.rfind("perm:", 0) == 0) {
        rest = literal.substr(5);
    } else if (literal.rfind("phased:", 0) == 0) {
        phased = true;
        rest = literal.substr(7);
    } else {
        throw std::invalid_argument("action literal must be \"trivial\", \"perm:...\" or "
                                    "\"phased:...\", got \"" +
                                    literal + "\"");
    }

    std::vector<std::string> segments = split(rest, ';');
    if (segments.size() != group.factors().size())
        throw std::invalid_argument("action literal has " + std::to_string(segments.size()) +
                                    " segments, group " + group.literal() + " has " +
                                    std::to_string(group.factors().size()) + " factors");
    std::vector<CMatrix> gens;
    gens.reserve(segments.size());
    for (size_t j = 0; j < segments.size(); ++j)
        gens.push_back(segment_to_matrix(segments[j], degree, phased,
                                         "action segment " + std::to_string(j)));
    GroupAction action(group, degree, std::move(gens));
    action.literal_ = literal;
    return action;
}

const CMatrix& GroupAction::implementer(const GroupElement& t) const {
    return implementers_[group_.index_of(t)];
}

CMatrix GroupAction::apply(const GroupElement& t, const CMatrix& a) const {
    const CMatrix& u = implementer(t);
    return u * a * u.adjoint();
}

CMatrix GroupAction::apply_inverse(const GroupElement& t, const CMatrix& a) const {
    const CMatrix& u = implementer(t);
    return u.adjoint() * a * u;
}

}  // namespace lpdl
