#include "q2sat/model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace q2sat {

namespace {

struct Token {
    std::string text;
    int column;
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#') ++j;
        out.push_back({std::string(line.substr(i, j - i)), static_cast<int>(i) + 1});
        i = j;
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view l = text.substr(pos, end - pos);
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        lines.push_back(l);
        pos = end + 1;
    }
    return lines;
}

bool parse_int(const std::string& s, long long& out) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (std::size_t k = i; k < s.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    if (s.size() > 18) return false;
    out = std::stoll(s);
    return true;
}

bool parse_mpz(const std::string& s, mpz_class& out) {
    long long tmp;
    if (s.size() <= 18) {
        if (!parse_int(s, tmp)) return false;
        out = static_cast<long>(tmp);
        return true;
    }
    std::size_t i = (s[0] == '-') ? 1 : 0;
    for (std::size_t k = i; k < s.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    return out.set_str(s, 10) == 0;
}

bool parse_rational(const std::string& s, mpq_class& out) {
    const std::size_t slash = s.find('/');
    mpz_class num, den = 1;
    if (slash == std::string::npos) {
        if (!parse_mpz(s, num)) return false;
    } else {
        if (!parse_mpz(s.substr(0, slash), num) || !parse_mpz(s.substr(slash + 1), den) || sgn(den) <= 0)
            return false;
    }
    out = mpq_class(num, den);
    out.canonicalize();
    return true;
}

std::string elem_text(const FieldElement& e, const LevelPtr& at) { return e.lifted(at).to_string(); }

}  // namespace

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

Instance Instance::empty(int n, FieldPtr field) {
    Instance inst;
    inst.n = n;
    inst.field = std::move(field);
    inst.base = TowerLevel::base(inst.field);
    return inst;
}

void Instance::add(int u, int v, const Row& eta) {
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) throw std::invalid_argument("constraint endpoints out of range");
    Constraint c;
    c.id = static_cast<int>(constraints.size());
    c.u = u;
    c.v = v;
    for (int k = 0; k < 4; ++k) c.eta[k] = eta[k].lifted(base);
    constraints.push_back(std::move(c));
}

FieldPtr gaussian_field() {
    static const FieldPtr f = [] {
        ComplexBox b{mpq_class(-1, 2), mpq_class(1, 2), mpq_class(1, 2), mpq_class(3, 2)};
        return NumberField::create({1, 0, 1}, b);
    }();
    return f;
}

Instance parse_instance(std::string_view text) {
    const auto lines = split_lines(text);
    bool header = false;
    std::optional<std::vector<mpz_class>> poly;
    std::optional<ComplexBox> box;
    int poly_line = 0;
    std::optional<Instance> inst;

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const int ln = static_cast<int>(li) + 1;
        const auto toks = tokenize(lines[li]);
        if (toks.empty()) continue;
        const std::string& kw = toks[0].text;
        auto fail = [&](const std::string& msg, std::size_t tok) -> ParseError {
            return ParseError(msg, ln, tok < toks.size() ? toks[tok].column : toks.back().column);
        };
        if (!header) {
            if (kw != "q2sat" || toks.size() != 2 || toks[1].text != "1")
                throw fail("expected header 'q2sat 1'", 0);
            header = true;
            continue;
        }
        if (kw == "field") {
            if (toks.size() < 2) throw fail("expected 'poly' or 'box'", 1);
            if (inst) throw fail("field lines must precede 'qubits'", 0);
            if (toks[1].text == "poly") {
                if (poly) throw fail("duplicate field polynomial", 1);
                if (toks.size() < 4) throw fail("polynomial needs at least two coefficients", toks.size() - 1);
                std::vector<mpz_class> p;
                for (std::size_t k = 2; k < toks.size(); ++k) {
                    mpz_class c;
                    if (!parse_mpz(toks[k].text, c)) throw fail("malformed polynomial coefficient", k);
                    p.push_back(c);
                }
                if (p.back() != 1) throw fail("polynomial must be monic", toks.size() - 1);
                poly = std::move(p);
                poly_line = ln;
            } else if (toks[1].text == "box") {
                if (box) throw fail("duplicate field box", 1);
                if (toks.size() != 6) throw fail("box needs four rationals", toks.size() - 1);
                mpq_class v[4];
                for (int k = 0; k < 4; ++k)
                    if (!parse_rational(toks[2 + k].text, v[k])) throw fail("malformed rational", 2 + k);
                box = ComplexBox{v[0], v[1], v[2], v[3]};
            } else {
                throw fail("expected 'poly' or 'box'", 1);
            }
            continue;
        }
        if (kw == "qubits") {
            if (inst) throw fail("duplicate 'qubits' line", 0);
            if (!poly) throw fail("'field poly' must precede 'qubits'", 0);
            long long n;
            if (toks.size() != 2 || !parse_int(toks[1].text, n) || n < 0 || n > (1LL << 30))
                throw fail("expected a nonnegative qubit count", 1);
            FieldPtr field;
            try {
                const bool plain_q = poly->size() == 2 && sgn((*poly)[0]) == 0 && !box;
                field = plain_q ? NumberField::rationals() : NumberField::create(*poly, box);
            } catch (const FieldSpecError& e) {
                throw ParseError(std::string("invalid field: ") + e.what(), poly_line, 1);
            }
            inst = Instance::empty(static_cast<int>(n), field);
            continue;
        }
        if (kw == "constraint") {
            if (!inst) throw fail("'qubits' must precede constraints", 0);
            if (toks.size() != 7) throw fail("constraint needs u, v and four coefficients", toks.size() - 1);
            long long u, v;
            if (!parse_int(toks[1].text, u)) throw fail("malformed qubit index", 1);
            if (!parse_int(toks[2].text, v)) throw fail("malformed qubit index", 2);
            if (u < 0 || u >= inst->n) throw fail("qubit index out of range", 1);
            if (v < 0 || v >= inst->n) throw fail("qubit index out of range", 2);
            if (u == v) throw fail("constraint endpoints must differ", 2);
            Row eta;
            bool nonzero = false;
            for (int k = 0; k < 4; ++k) {
                try {
                    eta[k] = parse_element(inst->base, toks[3 + k].text);
                } catch (const std::exception& e) {
                    throw fail(std::string("malformed coefficient: ") + e.what(), 3 + k);
                }
                nonzero = nonzero || !eta[k].syntactically_zero();
            }
            if (!nonzero) throw fail("constraint row is zero", 3);
            inst->add(static_cast<int>(u), static_cast<int>(v), eta);
            continue;
        }
        throw fail("unknown keyword '" + kw + "'", 0);
    }
    if (!header) throw ParseError("missing header 'q2sat 1'", 1, 1);
    if (!inst) throw ParseError("missing 'qubits' line", static_cast<int>(lines.size()) + 1, 1);
    return std::move(*inst);
}

std::string serialize_instance(const Instance& inst) {
    std::ostringstream os;
    os << "q2sat 1\nfield poly";
    for (const auto& c : inst.field->poly()) os << ' ' << c.get_str();
    os << '\n';
    if (const auto& b = inst.field->box())
        os << "field box " << b->re_lo.get_str() << ' ' << b->re_hi.get_str() << ' ' << b->im_lo.get_str() << ' '
           << b->im_hi.get_str() << '\n';
    os << "qubits " << inst.n << '\n';
    for (const auto& c : inst.constraints) {
        os << "constraint " << c.u << ' ' << c.v;
        for (const auto& e : c.eta) os << ' ' << elem_text(e, inst.base);
        os << '\n';
    }
    return os.str();
}

bool structurally_equal(const Instance& a, const Instance& b) {
    if (a.n != b.n || !a.field->equivalent(*b.field) || a.constraints.size() != b.constraints.size()) return false;
    for (std::size_t i = 0; i < a.constraints.size(); ++i) {
        const auto& x = a.constraints[i];
        const auto& y = b.constraints[i];
        if (x.u != y.u || x.v != y.v) return false;
        for (int k = 0; k < 4; ++k) {
            FieldElement yk = y.eta[k].lifted(a.base);
            if (!fe_eq(x.eta[k], yk)) return false;
        }
    }
    return true;
}

std::string serialize_assignment(const Assignment& a) {
    std::ostringstream os;
    for (const auto& [q, s] : a.singles) {
        os << "qubit " << q << ' ' << s.level->descriptor();
        for (const auto& e : s.vec) os << ' ' << elem_text(e, s.level);
        os << '\n';
    }
    for (const auto& [key, p] : a.pairs) {
        os << "pair " << key.first << ' ' << key.second << ' ' << p.level->descriptor();
        for (const auto& e : p.vec) os << ' ' << elem_text(e, p.level);
        os << '\n';
    }
    return os.str();
}

std::optional<Assignment> parse_assignment(std::string_view text, const Instance& inst, LevelInterner& levels) {
    const auto lines = split_lines(text);
    Assignment out;
    bool any = false;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const int ln = static_cast<int>(li) + 1;
        const auto toks = tokenize(lines[li]);
        if (toks.empty()) continue;
        auto fail = [&](const std::string& msg, std::size_t tok) -> ParseError {
            return ParseError(msg, ln, tok < toks.size() ? toks[tok].column : toks.back().column);
        };
        const std::string& kw = toks[0].text;
        if (kw == "UNSAT") {
            if (any || toks.size() != 1) throw fail("'UNSAT' must stand alone", 0);
            for (std::size_t rest = li + 1; rest < lines.size(); ++rest)
                if (!tokenize(lines[rest]).empty()) throw ParseError("content after 'UNSAT'", static_cast<int>(rest) + 1, 1);
            return std::nullopt;
        }
        any = true;
        auto index = [&](std::size_t k) {
            long long q;
            if (!parse_int(toks[k].text, q)) throw fail("malformed qubit index", k);
            if (q < 0 || q >= inst.n) throw fail("qubit index out of range", k);
            return static_cast<int>(q);
        };
        auto level_at = [&](std::size_t k) {
            try {
                return levels.get(toks[k].text);
            } catch (const std::exception& e) {
                throw fail(std::string("invalid level: ") + e.what(), k);
            }
        };
        auto element_at = [&](const LevelPtr& L, std::size_t k) {
            try {
                return parse_element(L, toks[k].text);
            } catch (const std::exception& e) {
                throw fail(std::string("malformed coefficient: ") + e.what(), k);
            }
        };
        if (kw == "qubit") {
            if (toks.size() != 5) throw fail("qubit line needs index, level and two coefficients", toks.size() - 1);
            const int q = index(1);
            if (out.singles.count(q)) throw fail("qubit assigned twice", 1);
            QubitState s;
            s.level = level_at(2);
            for (int k = 0; k < 2; ++k) s.vec[k] = element_at(s.level, 3 + k);
            out.singles.emplace(q, std::move(s));
        } else if (kw == "pair") {
            if (toks.size() != 8) throw fail("pair line needs two indices, level and four coefficients", toks.size() - 1);
            const int a = index(1), b = index(2);
            if (a >= b) throw fail("pair indices must be increasing", 2);
            if (out.pairs.count({a, b})) throw fail("pair assigned twice", 1);
            PairState p;
            p.level = level_at(3);
            for (int k = 0; k < 4; ++k) p.vec[k] = element_at(p.level, 4 + k);
            out.pairs.emplace(std::make_pair(a, b), std::move(p));
        } else {
            throw fail("unknown keyword '" + kw + "'", 0);
        }
    }
    return out;
}

// ----------------------------------------------------------------- 2-CNF

Cnf parse_dimacs(std::string_view text) {
    const auto lines = split_lines(text);
    Cnf f;
    bool header = false;
    long long declared_clauses = -1;
    std::vector<int> current;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const int ln = static_cast<int>(li) + 1;
        std::string_view line = lines[li];
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        if (line[first] == 'c' || line[first] == '%') continue;
        std::vector<Token> toks;
        {
            std::size_t i = 0;
            while (i < line.size()) {
                if (std::isspace(static_cast<unsigned char>(line[i]))) {
                    ++i;
                    continue;
                }
                std::size_t j = i;
                while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
                toks.push_back({std::string(line.substr(i, j - i)), static_cast<int>(i) + 1});
                i = j;
            }
        }
        if (toks[0].text == "p") {
            long long nv, nc;
            if (header || toks.size() != 4 || toks[1].text != "cnf" || !parse_int(toks[2].text, nv) ||
                !parse_int(toks[3].text, nc) || nv < 0 || nc < 0)
                throw ParseError("expected 'p cnf <vars> <clauses>'", ln, toks[0].column);
            header = true;
            f.num_vars = static_cast<int>(nv);
            declared_clauses = nc;
            continue;
        }
        if (!header) throw ParseError("clause before the 'p cnf' header", ln, toks[0].column);
        for (const auto& t : toks) {
            long long lit;
            if (!parse_int(t.text, lit)) throw ParseError("malformed literal", ln, t.column);
            if (lit == 0) {
                f.clauses.push_back(current);
                current.clear();
                continue;
            }
            if (std::llabs(lit) > f.num_vars) throw ParseError("variable out of range", ln, t.column);
            current.push_back(static_cast<int>(lit));
        }
    }
    if (!header) throw ParseError("missing 'p cnf' header", 1, 1);
    if (!current.empty()) f.clauses.push_back(current);
    if (declared_clauses >= 0 && static_cast<long long>(f.clauses.size()) != declared_clauses)
        throw ParseError("clause count does not match the header", static_cast<int>(lines.size()), 1);
    return f;
}

std::string serialize_dimacs(const Cnf& f) {
    std::ostringstream os;
    os << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
    for (const auto& c : f.clauses) {
        for (int l : c) os << l << ' ';
        os << "0\n";
    }
    return os.str();
}

Instance embed_cnf(const Cnf& f) {
    Instance inst = Instance::empty(f.num_vars, NumberField::rationals());
    for (std::size_t k = 0; k < f.clauses.size(); ++k) {
        const auto& c = f.clauses[k];
        if (c.size() != 2)
            throw std::invalid_argument("clause " + std::to_string(k + 1) + " does not have exactly two literals");
        const int a = std::abs(c[0]) - 1, b = std::abs(c[1]) - 1;
        if (a == b) throw std::invalid_argument("clause " + std::to_string(k + 1) + " mentions one variable twice");
        // The violating assignment is x_a = (c[0] < 0), x_b = (c[1] < 0).
        const int ia = c[0] < 0 ? 1 : 0, ib = c[1] < 0 ? 1 : 0;
        Row eta;
        for (auto& e : eta) e = FieldElement(0);
        eta[2 * ia + ib] = FieldElement(1);
        inst.add(a, b, eta);
    }
    return inst;
}

}  // namespace q2sat
