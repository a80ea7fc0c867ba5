// ============================================================================
// pdtn/textfmt.hpp — file formats and expression grammars
// ============================================================================
//
// Owns every serialization surface of the project:
//
//   * model files (.pdtn.json)  — JSON, canonical field order, parse/serialize
//     round-trip identity
//   * global property strings   — `#NAME >= 1`, `#NAME = 0`, `&`, `|`, parens;
//     `&` binds tighter than `|`
//   * 2-counter machine files (.2cm) — line-oriented keyword format
//   * trace exchange format     — JSON list of delay / discrete steps
//
// ============================================================================

#ifndef PDTN_TEXTFMT_HPP
#define PDTN_TEXTFMT_HPP

#include "pdtn/model.hpp"
#include "pdtn/rational.hpp"

#include <json.hpp>

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdtn {

using Json = nlohmann::ordered_json;

/// Error raised by every parser in this module. `line`/`column` are 1-based
/// and 0 when the position is unknown.
struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(std::string msg, int l = 0, int c = 0)
        : std::runtime_error(std::move(msg)), line(l), column(c) {}
};

// ── Model files ─────────────────────────────────────────────────────────────

namespace detail {

inline std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline long long get_int(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    if (!j[key].is_number_integer())
        throw ParseError(where + ": key '" + std::string(key) + "' must be an integer");
    return j[key].get<long long>();
}

inline std::string get_str(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    if (!j[key].is_string())
        throw ParseError(where + ": key '" + std::string(key) + "' must be a string");
    return j[key].get<std::string>();
}

inline Inequality parse_ineq(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": inequality must be an object");
    Inequality out;
    out.clock = get_str(j, "clock", where);
    auto rel = rel_from_text(get_str(j, "rel", where));
    if (!rel) throw ParseError(where + ": unknown relation");
    out.rel = *rel;
    if (j.contains("terms")) {
        if (!j["terms"].is_array()) throw ParseError(where + ": 'terms' must be an array");
        for (const auto& t : j["terms"])
            out.rhs.terms.emplace_back(get_int(t, "coef", where), get_str(t, "param", where));
    }
    out.rhs.constant = j.contains("const") ? get_int(j, "const", where) : 0;
    out.rhs.normalize();
    return out;
}

inline Constraint parse_constraint(const Json& j, const std::string& where) {
    Constraint out;
    if (!j.is_array()) throw ParseError(where + ": constraint must be an array of inequalities");
    for (const auto& e : j) out.conjuncts.push_back(parse_ineq(e, where));
    return out;
}

inline Json ineq_json(const Inequality& q) {
    Json j;
    j["clock"] = q.clock;
    j["rel"] = rel_text(q.rel);
    Json terms = Json::array();
    for (const auto& [coef, p] : q.rhs.terms) terms.push_back(Json{{"coef", coef}, {"param", p}});
    j["terms"] = std::move(terms);
    j["const"] = q.rhs.constant;
    return j;
}

inline Json constraint_json(const Constraint& c) {
    Json arr = Json::array();
    for (const auto& q : c.conjuncts) arr.push_back(ineq_json(q));
    return arr;
}

}  // namespace detail

/// Parses a model file. Throws ParseError on malformed input; propagates
/// validation diagnostics as a ParseError listing the first few.
inline GuardedPTA parse_model(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(std::string("model syntax error: ") + e.what(), line, col);
    }
    if (!doc.is_object()) throw ParseError("model file must be a JSON object");

    GuardedPTA m;
    m.name = doc.contains("name") ? detail::get_str(doc, "name", "model") : "";
    if (!doc.contains("clocks") || !doc["clocks"].is_array())
        throw ParseError("model: missing 'clocks' array");
    for (const auto& c : doc["clocks"]) m.clocks.push_back(c.get<std::string>());
    if (doc.contains("params")) {
        if (!doc["params"].is_array()) throw ParseError("model: 'params' must be an array");
        for (const auto& p : doc["params"]) m.params.push_back(p.get<std::string>());
    }

    if (!doc.contains("locations") || !doc["locations"].is_array())
        throw ParseError("model: missing 'locations' array");
    int initial_count = 0;
    for (const auto& lj : doc["locations"]) {
        std::string lname = detail::get_str(lj, "name", "location");
        m.locations.push_back(lname);
        if (lj.contains("initial") && lj["initial"].get<bool>()) {
            m.initial = lname;
            ++initial_count;
        }
        if (lj.contains("invariant")) {
            Constraint inv = detail::parse_constraint(lj["invariant"], "invariant of '" + lname + "'");
            if (!inv.is_true()) m.invariants[lname] = std::move(inv);
        }
    }
    if (initial_count != 1)
        throw ParseError("model: exactly one location must carry initial=true (found " +
                         std::to_string(initial_count) + ")");

    if (doc.contains("edges")) {
        if (!doc["edges"].is_array()) throw ParseError("model: 'edges' must be an array");
        for (const auto& ej : doc["edges"]) {
            Edge e;
            const std::string where = "edge";
            e.source = detail::get_str(ej, "from", where);
            e.target = detail::get_str(ej, "to", where);
            e.action = detail::get_str(ej, "action", where);
            if (ej.contains("guard")) e.guard = detail::parse_constraint(ej["guard"], where + " guard");
            if (ej.contains("locguard")) e.locguard = detail::get_str(ej, "locguard", where);
            if (ej.contains("reset")) {
                if (!ej["reset"].is_array()) throw ParseError(where + ": 'reset' must be an array");
                for (const auto& c : ej["reset"]) e.resets.push_back(c.get<std::string>());
                std::sort(e.resets.begin(), e.resets.end());
                e.resets.erase(std::unique(e.resets.begin(), e.resets.end()), e.resets.end());
            }
            if (!m.has_action(e.action)) m.actions.push_back(e.action);
            m.edges.push_back(std::move(e));
        }
    }

    auto diags = validate(m);
    if (!diags.empty()) {
        std::string msg = "model fails validation:";
        for (std::size_t i = 0; i < diags.size() && i < 5; ++i) msg += "\n  " + diags[i];
        throw ParseError(msg);
    }
    return m;
}

/// Canonical serialization: declaration order preserved, True constraints
/// and ⊤ location guards omitted. parse(serialize(m)) == m.
inline std::string serialize_model(const GuardedPTA& m) {
    Json doc;
    doc["name"] = m.name;
    doc["clocks"] = m.clocks;
    doc["params"] = m.params;
    Json locs = Json::array();
    for (const auto& l : m.locations) {
        Json lj;
        lj["name"] = l;
        if (l == m.initial) lj["initial"] = true;
        const Constraint& inv = m.invariant_of(l);
        if (!inv.is_true()) lj["invariant"] = detail::constraint_json(inv);
        locs.push_back(std::move(lj));
    }
    doc["locations"] = std::move(locs);
    Json edges = Json::array();
    for (const auto& e : m.edges) {
        Json ej;
        ej["from"] = e.source;
        ej["to"] = e.target;
        ej["action"] = e.action;
        if (!e.guard.is_true()) ej["guard"] = detail::constraint_json(e.guard);
        if (e.locguard) ej["locguard"] = *e.locguard;
        if (!e.resets.empty()) ej["reset"] = e.resets;
        edges.push_back(std::move(ej));
    }
    doc["edges"] = std::move(edges);
    return doc.dump(2) + "\n";
}

// ── Global property expressions ─────────────────────────────────────────────

struct PropertyAst {
    enum class Kind { AtLeastOne, NoneIn, And, Or };
    Kind kind = Kind::AtLeastOne;
    std::string location;               // atoms only
    std::vector<PropertyAst> children;  // And/Or, always >= 2

    static PropertyAst at_least_one(std::string loc) {
        PropertyAst a;
        a.kind = Kind::AtLeastOne;
        a.location = std::move(loc);
        return a;
    }
    static PropertyAst none_in(std::string loc) {
        PropertyAst a;
        a.kind = Kind::NoneIn;
        a.location = std::move(loc);
        return a;
    }

    /// Every location named in any atom, in first-appearance order.
    std::vector<std::string> mentioned_locations() const {
        std::vector<std::string> out;
        collect(out);
        return out;
    }

private:
    void collect(std::vector<std::string>& out) const {
        if (kind == Kind::AtLeastOne || kind == Kind::NoneIn) {
            if (std::find(out.begin(), out.end(), location) == out.end())
                out.push_back(location);
            return;
        }
        for (const auto& ch : children) ch.collect(out);
    }
};

namespace detail {

class PropertyParser {
public:
    explicit PropertyParser(const std::string& text) : text_(text) {}

    PropertyAst parse() {
        PropertyAst root = parse_or();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return root;
    }

private:
    PropertyAst parse_or() {
        std::vector<PropertyAst> parts;
        parts.push_back(parse_and());
        while (peek() == '|') {
            ++pos_;
            parts.push_back(parse_and());
        }
        if (parts.size() == 1) return std::move(parts.front());
        PropertyAst node;
        node.kind = PropertyAst::Kind::Or;
        node.children = std::move(parts);
        return node;
    }

    PropertyAst parse_and() {
        std::vector<PropertyAst> parts;
        parts.push_back(parse_atom());
        while (peek() == '&') {
            ++pos_;
            parts.push_back(parse_atom());
        }
        if (parts.size() == 1) return std::move(parts.front());
        PropertyAst node;
        node.kind = PropertyAst::Kind::And;
        node.children = std::move(parts);
        return node;
    }

    PropertyAst parse_atom() {
        skip_ws();
        if (peek() == '(') {
            ++pos_;
            PropertyAst inner = parse_or();
            skip_ws();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return inner;
        }
        if (peek() != '#') fail("expected '#' atom or '('");
        ++pos_;
        std::string name = parse_name();
        skip_ws();
        // only `>= 1` and `= 0` exist in the grammar
        if (pos_ + 1 < text_.size() && text_[pos_] == '>' && text_[pos_ + 1] == '=') {
            pos_ += 2;
            if (parse_number() != "1") fail("count atoms other than '>= 1' are not allowed");
            return PropertyAst::at_least_one(std::move(name));
        }
        if (peek() == '=') {
            ++pos_;
            if (parse_number() != "0") fail("count atoms other than '= 0' are not allowed");
            return PropertyAst::none_in(std::move(name));
        }
        fail("expected '>= 1' or '= 0' after location atom");
        return {};
    }

    std::string parse_name() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected location name after '#'");
        return text_.substr(start, pos_ - start);
    }

    std::string parse_number() {
        skip_ws();
        std::size_t start = pos_;
        if (peek() == '-') ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected a number");
        return text_.substr(start, pos_ - start);
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError("property: " + msg, 1, static_cast<int>(pos_) + 1);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline PropertyAst parse_property(const std::string& text) {
    return detail::PropertyParser(text).parse();
}

inline std::string serialize_property(const PropertyAst& a, bool parenthesize = false) {
    switch (a.kind) {
        case PropertyAst::Kind::AtLeastOne: return "#" + a.location + " >= 1";
        case PropertyAst::Kind::NoneIn: return "#" + a.location + " = 0";
        case PropertyAst::Kind::And:
        case PropertyAst::Kind::Or: {
            const char* sep = a.kind == PropertyAst::Kind::And ? " & " : " | ";
            std::string out;
            for (std::size_t i = 0; i < a.children.size(); ++i) {
                if (i) out += sep;
                bool need_parens = a.kind == PropertyAst::Kind::And &&
                                   a.children[i].kind == PropertyAst::Kind::Or;
                out += serialize_property(a.children[i], need_parens);
            }
            return parenthesize ? "(" + out + ")" : out;
        }
    }
    return "";
}

// ── 2-counter machine programs ──────────────────────────────────────────────

struct MachineStep {
    enum class Kind { Inc, ZDec };
    Kind kind = Kind::Inc;
    int counter = 1;              // 1 or 2
    std::string next;             // Inc target / ZDec nonzero target
    std::string next_zero;        // ZDec zero target
};

struct MachineProgram {
    std::vector<std::string> states;  // first-appearance order
    std::string initial;
    std::string halt;
    std::map<std::string, MachineStep> steps;
};

/// Line-oriented format: `state NAME`, `init NAME`, `halt NAME`,
/// `inc L FROM TO`, `zdec L FROM TO_NONZERO TO_ZERO`; `#` starts a comment.
/// `init` defaults to the source of the first instruction. Every non-halt
/// state must carry exactly one step.
inline MachineProgram parse_machine(const std::string& text) {
    MachineProgram m;
    std::vector<std::string> declared;
    bool have_decls = false;

    auto touch = [&](const std::string& s) {
        if (std::find(m.states.begin(), m.states.end(), s) == m.states.end())
            m.states.push_back(s);
    };

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        auto want = [&](std::size_t n) {
            if (tok.size() != n)
                throw ParseError("machine: '" + tok[0] + "' expects " + std::to_string(n - 1) +
                                     " arguments",
                                 lineno);
        };
        auto counter_of = [&](const std::string& s) {
            if (s == "1") return 1;
            if (s == "2") return 2;
            throw ParseError("machine: counter index must be 1 or 2", lineno);
        };

        if (tok[0] == "state") {
            want(2);
            have_decls = true;
            declared.push_back(tok[1]);
            touch(tok[1]);
        } else if (tok[0] == "init") {
            want(2);
            if (!m.initial.empty())
                throw ParseError("machine: duplicate 'init' declaration", lineno);
            m.initial = tok[1];
            touch(tok[1]);
        } else if (tok[0] == "halt") {
            want(2);
            if (!m.halt.empty())
                throw ParseError("machine: duplicate 'halt' declaration", lineno);
            m.halt = tok[1];
            touch(tok[1]);
        } else if (tok[0] == "inc") {
            want(4);
            touch(tok[2]);
            touch(tok[3]);
            if (m.steps.count(tok[2]))
                throw ParseError("machine: duplicate step for state '" + tok[2] + "'", lineno);
            if (m.initial.empty()) m.initial = tok[2];
            m.steps[tok[2]] = MachineStep{MachineStep::Kind::Inc, counter_of(tok[1]), tok[3], ""};
        } else if (tok[0] == "zdec") {
            want(5);
            touch(tok[2]);
            touch(tok[3]);
            touch(tok[4]);
            if (m.steps.count(tok[2]))
                throw ParseError("machine: duplicate step for state '" + tok[2] + "'", lineno);
            if (m.initial.empty()) m.initial = tok[2];
            m.steps[tok[2]] =
                MachineStep{MachineStep::Kind::ZDec, counter_of(tok[1]), tok[3], tok[4]};
        } else {
            throw ParseError("machine: unknown directive '" + tok[0] + "'", lineno);
        }
    }

    if (m.halt.empty()) throw ParseError("machine: missing 'halt' declaration");
    if (m.initial.empty()) throw ParseError("machine: no instructions and no 'init' declaration");
    if (m.steps.count(m.halt))
        throw ParseError("machine: halt state '" + m.halt + "' must not carry a step");
    if (have_decls) {
        for (const auto& s : m.states)
            if (std::find(declared.begin(), declared.end(), s) == declared.end())
                throw ParseError("machine: undeclared state referenced: '" + s + "'");
    }
    for (const auto& s : m.states)
        if (s != m.halt && !m.steps.count(s))
            throw ParseError("machine: state '" + s + "' has no step and is not the halt state");
    return m;
}

// ── Trace exchange format ───────────────────────────────────────────────────
// JSON list of {"delay": "a/b"} and {"proc": i, "edge": k}; `proc` is
// 1-based, `edge` indexes into the model's edge list (0-based).

struct TimedStep {
    enum class Kind { Delay, Discrete };
    Kind kind = Kind::Delay;
    Rat delay;           // Delay only
    int proc_index = 0;  // Discrete only, 1-based
    int edge_index = 0;  // Discrete only, 0-based

    static TimedStep make_delay(Rat d) {
        TimedStep s;
        s.kind = Kind::Delay;
        s.delay = d;
        return s;
    }
    static TimedStep make_discrete(int proc, int edge) {
        TimedStep s;
        s.kind = Kind::Discrete;
        s.proc_index = proc;
        s.edge_index = edge;
        return s;
    }

    bool operator==(const TimedStep& o) const {
        if (kind != o.kind) return false;
        return kind == Kind::Delay ? delay == o.delay
                                   : proc_index == o.proc_index && edge_index == o.edge_index;
    }
};

struct Trace {
    std::vector<TimedStep> steps;

    bool operator==(const Trace& o) const { return steps == o.steps; }
};

inline Json trace_json(const Trace& t) {
    Json arr = Json::array();
    for (const auto& s : t.steps) {
        if (s.kind == TimedStep::Kind::Delay)
            arr.push_back(Json{{"delay", rat_to_string(s.delay)}});
        else
            arr.push_back(Json{{"proc", s.proc_index}, {"edge", s.edge_index}});
    }
    return arr;
}

inline Trace trace_from_json(const Json& arr) {
    if (!arr.is_array()) throw ParseError("trace: expected a JSON array");
    Trace t;
    for (const auto& sj : arr) {
        if (sj.contains("delay")) {
            Rat d = rat_from_string(sj["delay"].get<std::string>());
            if (d < Rat(0)) throw ParseError("trace: negative delay");
            t.steps.push_back(TimedStep::make_delay(d));
        } else if (sj.contains("proc") && sj.contains("edge")) {
            t.steps.push_back(
                TimedStep::make_discrete(sj["proc"].get<int>(), sj["edge"].get<int>()));
        } else {
            throw ParseError("trace: step must carry 'delay' or 'proc'+'edge'");
        }
    }
    return t;
}

}  // namespace pdtn

#endif  // PDTN_TEXTFMT_HPP
