#include "gradcon/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <variant>

#include "gradcon/errors.hpp"
#include "gradcon/polynomial.hpp"

namespace gradcon {

namespace {

struct Value {
    using Array = std::vector<Value>;
    std::variant<double, std::string, bool, Array> data;
    int line = 0;

    bool is_number() const { return std::holds_alternative<double>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_array() const { return std::holds_alternative<Array>(data); }
};

struct Entry {
    Value value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    std::map<std::string, std::pair<Section, int>> run() {
        std::map<std::string, std::pair<Section, int>> doc;
        std::string section;
        while (true) {
            skip_blank_lines();
            if (at_end()) break;
            const int line = line_;
            if (peek() == '[') {
                ++pos_;
                section = identifier("section name");
                skip_space();
                expect(']');
                end_of_line();
                if (doc.count(section)) throw ConfigError("duplicate section [" + section + "]", line);
                doc[section].second = line;
                continue;
            }
            if (section.empty()) throw ConfigError("key outside of any [section]", line);
            const std::string key = identifier("key");
            skip_space();
            expect('=');
            skip_space();
            Value v = value();
            end_of_line();
            auto& sec = doc[section].first;
            if (sec.count(key)) throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line);
            sec[key] = Entry{std::move(v), line, false};
        }
        return doc;
    }

private:
    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }

    void skip_space() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }
    void skip_comment() {
        if (peek() == '#')
            while (!at_end() && peek() != '\n') ++pos_;
    }
    void skip_blank_lines() {
        while (true) {
            skip_space();
            skip_comment();
            if (peek() != '\n') return;
            ++pos_;
            ++line_;
        }
    }
    // Whitespace, comments and newlines inside brackets.
    void skip_any() {
        while (true) {
            skip_space();
            skip_comment();
            if (peek() != '\n') return;
            ++pos_;
            ++line_;
        }
    }
    void end_of_line() {
        skip_space();
        skip_comment();
        if (at_end()) return;
        if (peek() != '\n') throw ConfigError(std::string("unexpected '") + peek() + "' after value", line_);
        ++pos_;
        ++line_;
    }
    void expect(char c) {
        if (peek() != c) throw ConfigError(std::string("expected '") + c + "'", line_);
        ++pos_;
    }
    std::string identifier(const char* what) {
        skip_space();
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
        if (pos_ == start) throw ConfigError(std::string("expected ") + what, line_);
        return std::string(s_.substr(start, pos_ - start));
    }

    Value value() {
        Value v;
        v.line = line_;
        const char c = peek();
        if (c == '[') {
            ++pos_;
            Value::Array items;
            skip_any();
            if (peek() == ']') {
                ++pos_;
                v.data = std::move(items);
                return v;
            }
            while (true) {
                skip_any();
                items.push_back(value());
                skip_any();
                if (peek() == ',') {
                    ++pos_;
                    skip_any();
                    if (peek() == ']') {
                        ++pos_;
                        break;
                    }
                    continue;
                }
                if (peek() == ']') {
                    ++pos_;
                    break;
                }
                if (at_end()) throw ConfigError("unterminated array", v.line);
                throw ConfigError(std::string("expected ',' or ']' in array, found '") + peek() + "'", line_);
            }
            v.data = std::move(items);
            return v;
        }
        if (c == '"') {
            ++pos_;
            std::string out;
            while (!at_end() && peek() != '"' && peek() != '\n') out += s_[pos_++];
            if (peek() != '"') throw ConfigError("unterminated string", v.line);
            ++pos_;
            v.data = std::move(out);
            return v;
        }
        if (s_.substr(pos_, 4) == "true") {
            pos_ += 4;
            v.data = true;
            return v;
        }
        if (s_.substr(pos_, 5) == "false") {
            pos_ += 5;
            v.data = false;
            return v;
        }
        const std::string rest(s_.substr(pos_, std::min<std::size_t>(64, s_.size() - pos_)));
        char* end = nullptr;
        const double d = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) throw ConfigError("expected a number, string, boolean or array", line_);
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        if (!std::isfinite(d)) throw ConfigError("non-finite number", line_);
        v.data = d;
        return v;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

// Typed access to one section with unknown-key detection.
class SectionReader {
public:
    SectionReader(std::string name, Section* sec, int line) : name_(std::move(name)), sec_(sec), line_(line) {}

    bool has(const std::string& key) const { return sec_ && sec_->count(key); }
    int line() const { return line_; }

    const Value& get(const std::string& key) {
        if (!has(key)) throw ConfigError("missing key '" + key + "' in [" + name_ + "]", line_);
        Entry& e = sec_->at(key);
        e.used = true;
        return e.value;
    }
    double number(const std::string& key) { return as_number(get(key), key); }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        return as_integer(get(key), key);
    }
    std::string string(const std::string& key) {
        const Value& v = get(key);
        if (!v.is_string()) throw ConfigError("'" + key + "' must be a string", v.line);
        return std::get<std::string>(v.data);
    }
    std::string string(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }
    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const Value& v = get(key);
        if (!std::holds_alternative<bool>(v.data)) throw ConfigError("'" + key + "' must be true or false", v.line);
        return std::get<bool>(v.data);
    }
    std::vector<double> numbers(const std::string& key) {
        const Value& v = get(key);
        std::vector<double> out;
        for (const Value& x : array(v, key)) out.push_back(as_number(x, key));
        return out;
    }

    void reject_unused() const {
        if (!sec_) return;
        for (const auto& [k, e] : *sec_)
            if (!e.used) throw ConfigError("unknown key '" + k + "' in [" + name_ + "]", e.line);
    }

    static const Value::Array& array(const Value& v, const std::string& key) {
        if (!v.is_array()) throw ConfigError("'" + key + "' must be an array", v.line);
        return std::get<Value::Array>(v.data);
    }
    static double as_number(const Value& v, const std::string& key) {
        if (!v.is_number()) throw ConfigError("'" + key + "' must be a number", v.line);
        return std::get<double>(v.data);
    }
    static int as_integer(const Value& v, const std::string& key) {
        const double d = as_number(v, key);
        if (d != std::floor(d) || std::abs(d) > 2e9) throw ConfigError("'" + key + "' must be an integer", v.line);
        return static_cast<int>(d);
    }

private:
    std::string name_;
    Section* sec_;
    int line_;
};

Polynomial polynomial(const Value& v, const std::string& key) {
    if (v.is_number()) return Polynomial(std::get<double>(v.data));
    if (!v.is_string()) throw ConfigError("'" + key + "' entries must be numbers or quoted polynomials", v.line);
    try {
        return Polynomial::parse(std::get<std::string>(v.data));
    } catch (const InvalidParameter& e) {
        throw ConfigError("'" + key + "': " + e.what(), v.line);
    }
}

// n x n array of polynomials.
std::vector<std::vector<Polynomial>> poly_matrix(const Value& v, int n, const std::string& key) {
    const auto& rows = SectionReader::array(v, key);
    if (static_cast<int>(rows.size()) != n) throw ConfigError("'" + key + "' must have " + std::to_string(n) + " rows", v.line);
    std::vector<std::vector<Polynomial>> m;
    for (const Value& r : rows) {
        const auto& cols = SectionReader::array(r, key);
        if (static_cast<int>(cols.size()) != n)
            throw ConfigError("'" + key + "' must have " + std::to_string(n) + " columns", r.line);
        std::vector<Polynomial> row;
        for (const Value& c : cols) row.push_back(polynomial(c, key));
        m.push_back(std::move(row));
    }
    return m;
}

CoefficientField symmetric_field(const Value& v, int n, const std::string& key, bool& depends_on_x) {
    auto m = poly_matrix(v, n, key);
    for (const auto& row : m)
        for (const auto& p : row) {
            if (p.depends_on_z()) throw ConfigError("'" + key + "' may not depend on z", v.line);
            depends_on_x = depends_on_x || p.depends_on_x();
        }
    if (n == 2 && m[0][1].to_string() != m[1][0].to_string())
        throw ConfigError("'" + key + "' must be symmetric", v.line);
    auto shared = std::make_shared<std::vector<std::vector<Polynomial>>>(std::move(m));
    if (n == 1) return [shared](const Vec& x) { return SymMat((*shared)[0][0](x)); };
    return [shared](const Vec& x) { return SymMat((*shared)[0][0](x), (*shared)[0][1](x), (*shared)[1][1](x)); };
}

SymMat constant_symmetric(const Value& v, int n, const std::string& key) {
    bool dep = false;
    const auto f = symmetric_field(v, n, key, dep);
    if (dep) throw ConfigError("'" + key + "' must be constant", v.line);
    return f(Vec(n));
}

Vec vector_of(const std::vector<double>& xs, int n, const std::string& key, int line) {
    if (static_cast<int>(xs.size()) != n) throw ConfigError("'" + key + "' must have " + std::to_string(n) + " entries", line);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = xs[i];
    return v;
}

EllipticOperator build_operator(SectionReader& sec, int n) {
    const std::string kind = sec.string("kind");
    StructuralConstants declared;
    if (sec.has("lambda")) declared.lambda = sec.number("lambda");
    if (sec.has("Lambda")) declared.Lambda = sec.number("Lambda");
    if (sec.has("upsilon")) declared.upsilon = sec.number("upsilon");
    bool dep = false;
    if (kind == "linear") {
        auto a = symmetric_field(sec.get("a"), n, "a", dep);
        return EllipticOperator::linear(n, std::move(a), !dep, declared);
    }
    if (kind == "bellman_max") {
        const Value& v = sec.get("branches");
        std::vector<CoefficientField> branches;
        for (const Value& b : SectionReader::array(v, "branches")) branches.push_back(symmetric_field(b, n, "branches", dep));
        if (branches.empty()) throw ConfigError("'branches' must not be empty", v.line);
        return EllipticOperator::bellman_max(n, std::move(branches), !dep, declared);
    }
    if (kind == "diffusion_sup") {
        const Value& sv = sec.get("sigma");
        auto m = std::make_shared<std::vector<std::vector<Polynomial>>>(poly_matrix(sv, n, "sigma"));
        for (const auto& row : *m)
            for (const auto& p : row) dep = dep || p.depends_on_x();
        const std::vector<double> controls = sec.numbers("controls");
        if (controls.empty()) throw ConfigError("'controls' must list at least one control value", sec.line());
        DiffusionField sigma = [m, n](const Vec& x, double z) {
            if (n == 1) return Mat((*m)[0][0](x, z));
            return Mat((*m)[0][0](x, z), (*m)[0][1](x, z), (*m)[1][0](x, z), (*m)[1][1](x, z));
        };
        return EllipticOperator::diffusion_sup(n, std::move(sigma), controls, !dep, declared);
    }
    throw ConfigError("unknown operator kind '" + kind + "'", sec.line());
}

ConvexBody build_body(SectionReader& sec, int n) {
    const std::string body = sec.string("body");
    try {
        if (body == "ball") return ConvexBody::ball(n, sec.number("radius"));
        if (body == "box") return ConvexBody::box(vector_of(sec.numbers("halfwidths"), n, "halfwidths", sec.line()));
        if (body == "ellipsoid") return ConvexBody::ellipsoid(constant_symmetric(sec.get("shape"), n, "shape"));
        if (body == "polytope") {
            const Value& v = sec.get("vertices");
            std::vector<Vec> verts;
            for (const Value& p : SectionReader::array(v, "vertices")) {
                std::vector<double> xs;
                for (const Value& c : SectionReader::array(p, "vertices")) xs.push_back(SectionReader::as_number(c, "vertices"));
                verts.push_back(vector_of(xs, n, "vertices", p.line));
            }
            return ConvexBody::polytope(std::move(verts));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid body: ") + e.what(), sec.line());
    }
    throw ConfigError("unknown body '" + body + "'", sec.line());
}

Constraint build_constraint(SectionReader& sec, int n) {
    const std::string kind = sec.string("kind");
    try {
        Constraint c = [&] {
            if (kind == "ball_norm") return Constraint::ball_norm(n, sec.number("radius"));
            if (kind == "ball_norm_squared") return Constraint::ball_norm_squared(n, sec.number("radius"));
            if (kind == "ellipsoid_quadratic")
                return Constraint::ellipsoid_quadratic(constant_symmetric(sec.get("matrix"), n, "matrix"),
                                                       sec.number("level"));
            if (kind == "support") return constraint_from_support(build_body(sec, n), sec.integer("samples", 720));
            throw ConfigError("unknown constraint kind '" + kind + "'", sec.line());
        }();
        if (sec.boolean("surrogate", false)) c = surrogate(c);
        return c;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid constraint: ") + e.what(), sec.line());
    }
}

ScalarField scalar_field(SectionReader& sec, const std::string& key) {
    const Value& v = sec.get(key);
    const Polynomial p = polynomial(v, key);
    if (p.depends_on_z()) throw ConfigError("'" + key + "' may not depend on z", v.line);
    return [p](const Vec& x) { return p(x); };
}

}  // namespace

Problem RunConfig::refined(int m) const {
    const Grid& g = problem.grid;
    Vec lo(g.dim()), hi(g.dim());
    std::array<int, kMaxDim> pts{1, 1};
    for (int a = 0; a < g.dim(); ++a) {
        lo[a] = g.lower(a);
        hi[a] = g.upper(a);
        pts[a] = m;
    }
    Problem p = problem;
    p.grid = Grid(lo, hi, pts);
    return p;
}

RunConfig parse_config(std::string_view text, bool enforce_wellposedness) {
    auto doc = Parser(text).run();
    static const std::set<std::string> known{"grid", "operator", "constraint", "problem", "solve", "verify", "mc"};
    for (const auto& [name, sec] : doc)
        if (!known.count(name)) throw ConfigError("unknown section [" + name + "]", sec.second);
    auto reader = [&](const std::string& name, bool required) {
        auto it = doc.find(name);
        if (it == doc.end()) {
            if (required) throw ConfigError("missing section [" + name + "]");
            return SectionReader(name, nullptr, 0);
        }
        return SectionReader(name, &it->second.first, it->second.second);
    };

    SectionReader grid = reader("grid", true);
    const std::vector<double> lo = grid.numbers("lower");
    const int n = static_cast<int>(lo.size());
    if (n < 1 || n > 2) throw ConfigError("grid dimension must be 1 or 2", grid.line());
    const Vec lower = vector_of(lo, n, "lower", grid.line());
    const Vec upper = vector_of(grid.numbers("upper"), n, "upper", grid.line());
    const std::vector<double> pts = grid.numbers("points");
    if (static_cast<int>(pts.size()) != n) throw ConfigError("'points' must have one entry per axis", grid.line());
    std::array<int, kMaxDim> points{1, 1};
    for (int a = 0; a < n; ++a) {
        if (pts[a] != std::floor(pts[a])) throw ConfigError("'points' must be integers", grid.line());
        points[a] = static_cast<int>(pts[a]);
    }
    grid.reject_unused();

    SectionReader op_sec = reader("operator", true);
    EllipticOperator op = build_operator(op_sec, n);
    op_sec.reject_unused();

    SectionReader c_sec = reader("constraint", true);
    Constraint constraint = build_constraint(c_sec, n);
    c_sec.reject_unused();

    SectionReader prob = reader("problem", true);
    ScalarField source = scalar_field(prob, "source");
    ScalarField boundary = prob.has("boundary") ? scalar_field(prob, "boundary") : [](const Vec&) { return 0.0; };
    prob.reject_unused();

    Grid g = [&] {
        try {
            return Grid(lower, upper, points);
        } catch (const Error& e) {
            throw ConfigError(std::string("invalid grid: ") + e.what(), grid.line());
        }
    }();

    RunConfig cfg{Problem{std::move(op), std::move(constraint), std::move(g), std::move(source), std::move(boundary)},
                  {}, {}, {0.1, 0.2}, 2.0, {}, {}};

    SectionReader solve_sec = reader("solve", false);
    try {
        if (solve_sec.has("schedule")) {
            cfg.schedule = solve_sec.numbers("schedule");
        } else {
            cfg.schedule = geometric_schedule(solve_sec.number("eps0", 0.1), solve_sec.number("ratio", 0.1),
                                              solve_sec.integer("count", 4));
        }
        cfg.solver.newton_tol = solve_sec.number("newton_tol", 0.0);
        cfg.solver.max_iters = solve_sec.integer("max_iters", 200);
        cfg.solver.max_backtracks = solve_sec.integer("max_backtracks", 30);
        cfg.solver.family = parse_penalty_family(solve_sec.string("penalty", "poly_blend"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("[solve]: ") + e.what(), solve_sec.line());
    }
    auto key_line = [&](const std::string& key) {
        return solve_sec.has(key) ? solve_sec.get(key).line : solve_sec.line();
    };
    try {
        cfg.solver.scheme = parse_gradient_scheme(solve_sec.string("scheme", "central"));
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), key_line("scheme"));
    }
    const int schedule_line = key_line("schedule");
    if (cfg.schedule.empty()) throw ConfigError("epsilon schedule is empty", schedule_line);
    for (std::size_t i = 0; i < cfg.schedule.size(); ++i)
        if (!(cfg.schedule[i] > 0.0) || (i > 0 && !(cfg.schedule[i] < cfg.schedule[i - 1])))
            throw ConfigError("epsilon schedule must be positive and strictly decreasing", schedule_line);
    solve_sec.reject_unused();

    SectionReader ver = reader("verify", false);
    if (ver.has("margins")) cfg.margins = ver.numbers("margins");
    cfg.growth_factor = ver.number("growth_factor", 2.0);
    if (!(cfg.growth_factor > 1.0)) throw ConfigError("'growth_factor' must exceed 1", ver.line());
    if (ver.has("refinements"))
        for (double m : ver.numbers("refinements")) {
            if (m != std::floor(m) || m < 3) throw ConfigError("'refinements' must be integers >= 3", ver.line());
            cfg.refinements.push_back(static_cast<int>(m));
        }
    ver.reject_unused();

    SectionReader mc = reader("mc", false);
    if (mc.has("x0")) {
        const Value& v = mc.get("x0");
        for (const Value& p : SectionReader::array(v, "x0")) {
            std::vector<double> xs;
            for (const Value& c : SectionReader::array(p, "x0")) xs.push_back(SectionReader::as_number(c, "x0"));
            cfg.mc.starts.push_back(vector_of(xs, n, "x0", p.line));
        }
    }
    cfg.mc.sim.paths = mc.integer("paths", 100000);
    cfg.mc.sim.dt = mc.number("dt", 1e-4);
    cfg.mc.sim.max_steps = static_cast<long>(mc.number("max_steps", 1e6));
    cfg.mc.sim.seed = static_cast<std::uint64_t>(mc.number("seed", 1.0));
    cfg.mc.slack = mc.number("slack", 0.02);
    cfg.mc.horizon = mc.number("horizon", 0.1);
    if (cfg.mc.sim.paths < 1 || !(cfg.mc.sim.dt > 0.0) || cfg.mc.sim.max_steps < 1)
        throw ConfigError("[mc] needs paths >= 1, dt > 0 and max_steps >= 1", mc.line());
    mc.reject_unused();

    if (enforce_wellposedness) require_wellposed(cfg.problem);
    return cfg;
}

RunConfig load_config(const std::string& path, bool enforce_wellposedness) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), enforce_wellposedness);
}

}  // namespace gradcon
