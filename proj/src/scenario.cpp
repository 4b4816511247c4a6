#include "privtrace/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "privtrace/csv.hpp"

namespace privtrace {

const std::vector<Fact>& Scenario::target(const std::string& tname) const {
    const auto it = targets.find(tname);
    if (it == targets.end())
        throw std::invalid_argument("scenario '" + name + "' declares no target '" + tname + "'");
    return it->second;
}

std::string Scenario::published_name(const std::string& dbname) const {
    if (!dbname.empty()) {
        if (!databases.count(dbname))
            throw std::invalid_argument("no database '" + dbname + "'");
        return dbname;
    }
    std::string found;
    for (const auto& [n, db] : databases)
        if (database_roles.at(n) == "published") {
            if (!found.empty())
                throw std::invalid_argument("several published databases; name one");
            found = n;
        }
    if (found.empty()) throw std::invalid_argument("scenario has no published database");
    return found;
}

const Database& Scenario::published(const std::string& dbname) const {
    return databases.at(published_name(dbname));
}

Scenario Scenario::without_external(const std::string& ext) const {
    Scenario out = *this;
    if (out.externals.erase(ext) == 0)
        throw std::invalid_argument("no external '" + ext + "' to remove");

    std::set<std::string> dropped_sets, dropped_aggs;
    const auto source_gone = [&](const SourceRef& s) {
        if (s.kind == SourceRef::Kind::External && s.name == ext) return true;
        return s.kind == SourceRef::Kind::Rule && dropped_sets.count(s.name) != 0;
    };
    const auto term_gone = [&](const Term& t) {
        const auto* agg = std::get_if<std::string>(&t);
        return agg && dropped_aggs.count(*agg) != 0;
    };

    std::vector<DeductionRule> kept;
    for (const DeductionRule& r : out.rules) {
        bool drop = false;
        if (const auto* x = std::get_if<SelectRule>(&r)) drop = source_gone(x->src);
        else if (const auto* x = std::get_if<ProjectRule>(&r)) drop = source_gone(x->src);
        else if (const auto* x = std::get_if<JoinRule>(&r))
            drop = source_gone(x->left) || source_gone(x->right);
        else if (const auto* x = std::get_if<UnionRule>(&r))
            drop = source_gone(x->left) || source_gone(x->right);
        else if (const auto* x = std::get_if<DiffRule>(&r))
            drop = source_gone(x->left) || source_gone(x->right);
        else if (const auto* x = std::get_if<AggregateRule>(&r))
            drop = source_gone(x->src);
        else if (const auto* x = std::get_if<BoundRule>(&r))
            drop = term_gone(x->lhs) || term_gone(x->rhs) ||
                   (x->guard && (dropped_aggs.count(x->guard->first) ||
                                 term_gone(x->guard->second)));
        if (drop) {
            if (std::holds_alternative<AggregateRule>(r))
                dropped_aggs.insert(rule_name(r));
            else
                dropped_sets.insert(rule_name(r));
        } else {
            kept.push_back(r);
        }
    }
    out.rules = std::move(kept);
    out.resolved = ResolvedRules::resolve(out.catalog, out.rules, out.externals);
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Low-level text helpers
// ---------------------------------------------------------------------------

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Strips an inline "//" comment occurring outside double quotes.
std::string strip_inline_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (!quoted && s[i] == '/' && s[i + 1] == '/') return std::string(s.substr(0, i));
    }
    return std::string(s);
}

// Splits on the separator outside quotes and outside bracketed tokens.
// Bracketed tokens do not nest; a '[' seen inside one is the closing
// bracket of a dash-style interval like "[40-50[".
std::vector<std::string> split_top_level(std::string_view s, char sep) {
    std::vector<std::string> out;
    bool quoted = false;
    bool bracketed = false;
    std::string cur;
    for (const char c : s) {
        if (c == '"') {
            quoted = !quoted;
            cur += c;
            continue;
        }
        if (!quoted) {
            if (!bracketed && (c == '[' || c == '(' || c == '{')) {
                bracketed = true;
                cur += c;
                continue;
            }
            if (bracketed && (c == ']' || c == ')' || c == '}' || c == '[')) {
                bracketed = false;
                cur += c;
                continue;
            }
            if (c == sep && !bracketed) {
                out.push_back(trim(cur));
                cur.clear();
                continue;
            }
        }
        cur += c;
    }
    out.push_back(trim(cur));
    return out;
}

std::string unquote(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (const char c : s) {
        if (c == '"') {
            quoted = !quoted;
            cur += c;
            continue;
        }
        if (!quoted && std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool looks_numeric(const std::string& w) {
    if (w.empty()) return false;
    const char c = w[0];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
}

// ---------------------------------------------------------------------------
// The parser
// ---------------------------------------------------------------------------

struct Line {
    int no;
    std::string text;
};

class Parser {
public:
    Parser(std::string_view text, std::string origin, const LoadOverrides& overrides,
           std::string base_dir)
        : origin_(std::move(origin)), base_dir_(std::move(base_dir)) {
        std::istringstream in{std::string(text)};
        std::string raw;
        int no = 0;
        while (std::getline(in, raw)) {
            ++no;
            std::string s = trim(strip_inline_comment(raw));
            if (s.empty() || s[0] == '#') continue;
            lines_.push_back(Line{no, std::move(s)});
        }
        scn_.name = origin_;
        prescan_options(overrides);
    }

    Scenario run() {
        for (const Line& ln : lines_) {
            line_ = ln.no;
            if (ln.text.front() == '[') {
                open_section(ln.text);
            } else {
                directive(ln.text);
            }
        }
        close_section();
        finalize();
        return std::move(scn_);
    }

private:
    enum class Section {
        None, Options, Schema, Taxonomy, Database, External, Policy, Target, Rules,
        Script, Mechanism, Compare
    };

    [[noreturn]] void fail(const std::string& msg, int col = 0) const {
        std::string where = origin_ + ":" + std::to_string(line_);
        if (col > 0) where += ":" + std::to_string(col);
        throw ScenarioError(where + ": " + msg);
    }

    // ---- options prescan (cell syntax depends on them) ----

    void prescan_options(const LoadOverrides& overrides) {
        bool in_options = false;
        for (const Line& ln : lines_) {
            line_ = ln.no;
            if (ln.text.front() == '[') {
                in_options = trim(ln.text) == "[options]";
                continue;
            }
            if (!in_options) continue;
            const auto eq = ln.text.find('=');
            if (eq == std::string::npos) fail("expected 'key = value' in [options]");
            const std::string key = trim(ln.text.substr(0, eq));
            const std::string value = trim(ln.text.substr(eq + 1));
            try {
                if (key == "dmax") {
                    scn_.options.default_ceiling = std::stoll(value);
                } else if (key == "interval-closure") {
                    if (value == "closed") scn_.options.closed_upper = true;
                    else if (value == "half-open") scn_.options.closed_upper = false;
                    else fail("interval-closure must be 'half-open' or 'closed'");
                } else if (key == "fact-ceiling") {
                    scn_.options.limits.max_facts = static_cast<std::size_t>(std::stoll(value));
                } else if (key == "depth-cap") {
                    scn_.options.limits.max_rounds = std::stoi(value);
                } else {
                    fail("unknown option '" + key + "'");
                }
            } catch (const ScenarioError&) {
                throw;
            } catch (const std::exception&) {
                fail("bad value '" + value + "' for option '" + key + "'");
            }
        }
        if (overrides.closed_upper) scn_.options.closed_upper = *overrides.closed_upper;
    }

    // ---- section dispatch ----

    void open_section(const std::string& text) {
        close_section();
        if (text.back() != ']') fail("unterminated section header");
        const auto ws = words(text.substr(1, text.size() - 2));
        if (ws.empty()) fail("empty section header");

        attrs_.clear();
        std::string name;
        for (std::size_t i = 1; i < ws.size(); ++i) {
            const auto eq = ws[i].find('=');
            if (eq == std::string::npos) {
                if (!name.empty()) fail("unexpected '" + ws[i] + "' in section header");
                name = ws[i];
            } else {
                attrs_[ws[i].substr(0, eq)] = ws[i].substr(eq + 1);
            }
        }

        const std::string& kind = ws[0];
        section_name_ = name;
        if (kind == "options") section_ = Section::Options;
        else if (kind == "schema") begin_schema(name);
        else if (kind == "taxonomy") begin_taxonomy(name);
        else if (kind == "database") begin_database(name, false);
        else if (kind == "external") begin_database(name, true);
        else if (kind == "policy") section_ = Section::Policy;
        else if (kind == "target") begin_target(name.empty() ? "main" : name);
        else if (kind == "rules") section_ = Section::Rules;
        else if (kind == "script") section_ = Section::Script;
        else if (kind == "mechanism") begin_mechanism(name);
        else if (kind == "compare") section_ = Section::Compare;
        else fail("unknown section '" + kind + "'");
    }

    void directive(const std::string& text) {
        switch (section_) {
            case Section::None: fail("directive outside any section");
            case Section::Options: break;  // handled by the prescan
            case Section::Schema: schema_line(text); break;
            case Section::Taxonomy: taxonomy_line(text); break;
            case Section::Database:
            case Section::External: database_line(text); break;
            case Section::Policy: policy_line(text); break;
            case Section::Target: target_line(text); break;
            case Section::Rules: rule_line(text); break;
            case Section::Script: script_line(text); break;
            case Section::Mechanism: mechanism_line(text); break;
            case Section::Compare: compare_line(text); break;
        }
    }

    void close_section() {
        switch (section_) {
            case Section::Schema: flush_schema(); break;
            case Section::Taxonomy: flush_taxonomy(); break;
            case Section::Script: flush_step(); break;
            case Section::Mechanism: flush_mechanism(); break;
            case Section::Compare: flush_compare_config(); break;
            default: break;
        }
        section_ = Section::None;
    }

    // ---- cells ----

    Value parse_cell(std::string token, const Header& h) const {
        token = trim(token);
        if (token.empty()) fail("empty cell under header '" + h.name + "'");
        if (token == "*" || token == "#" || token == "$") return Value::wildcard();

        try {
            switch (h.cls) {
                case HeaderClass::Nominal: return parse_nominal(token);
                case HeaderClass::Numerval: return parse_numerval(token, h);
                case HeaderClass::Numerical: return Value::number(Rational::parse(token));
                case HeaderClass::Taxoral: return Value::tax_node(*h.taxonomy, unquote(token));
            }
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::exception& e) {
            fail("bad cell '" + token + "' under header '" + h.name + "': " + e.what());
        }
        fail("unreachable");
    }

    Value parse_nominal(const std::string& token) const {
        if (token.front() == '{') {
            if (token.back() != '}') fail("unterminated set '" + token + "'");
            std::vector<std::string> atoms;
            for (const std::string& a : split_top_level(token.substr(1, token.size() - 2), ','))
                atoms.push_back(unquote(a));
            return Value::nominal(std::move(atoms));
        }
        return Value::atom(unquote(token));
    }

    Value parse_numerval(const std::string& token, const Header& h) const {
        const std::int64_t ceiling = h.ceiling.value_or(scn_.options.default_ceiling);
        if (token.rfind(">=", 0) == 0)
            return Value::interval(std::stoll(trim(token.substr(2))), ceiling);
        if (token.rfind("<=", 0) == 0) {
            const std::int64_t hi = std::stoll(trim(token.substr(2)));
            return Value::interval(std::min<std::int64_t>(0, hi), hi);
        }
        if (token.front() == '[' || token.front() == '(') return parse_interval(token);
        const Rational r = Rational::parse(token);
        if (!r.is_integer()) fail("interval-valued header '" + h.name + "' needs integers");
        return Value::interval(r.num(), r.num());
    }

    Value parse_interval(const std::string& token) const {
        const char first = token.front();
        const char last = token.back();
        if (first != '[' && first != '(') fail("bad interval '" + token + "'");
        if (last != ']' && last != ')' && last != '[') fail("bad interval '" + token + "'");
        const std::string inner = token.substr(1, token.size() - 2);

        std::string lo_s, hi_s;
        bool dash_style = false;
        const auto comma = inner.find(',');
        if (comma != std::string::npos) {
            lo_s = trim(inner.substr(0, comma));
            hi_s = trim(inner.substr(comma + 1));
        } else {
            const auto dash = inner.find('-', 1);  // a leading '-' is a sign
            if (dash == std::string::npos) fail("bad interval '" + token + "'");
            lo_s = trim(inner.substr(0, dash));
            hi_s = trim(inner.substr(dash + 1));
            dash_style = true;
        }

        const bool lo_closed = first == '[';
        bool hi_closed;
        if (last == ']') hi_closed = true;
        else if (last == ')') hi_closed = false;
        else hi_closed = scn_.options.closed_upper;  // dash-style "[a-b["
        if (last == '[' && !dash_style) fail("bad interval '" + token + "'");

        return Value::interval(std::stoll(lo_s), lo_closed, std::stoll(hi_s), hi_closed);
    }

    // "schema: cell, cell, ..." -> a validated fact
    Fact parse_fact(const std::string& spec) const {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) fail("expected 'schema: cells' in '" + spec + "'");
        const std::string sname = trim(spec.substr(0, colon));
        const int sid = scn_.catalog.schema_id(sname);
        if (sid < 0) fail("unknown schema '" + sname + "'");
        const Schema& s = scn_.catalog.schema(sid);

        const auto cells = split_top_level(spec.substr(colon + 1), ',');
        if (cells.size() != s.arity())
            fail("tuple has " + std::to_string(cells.size()) + " cells, schema '" + sname +
                 "' has " + std::to_string(s.arity()));
        Tuple t;
        for (std::size_t i = 0; i < cells.size(); ++i)
            t.cells.push_back(parse_cell(cells[i], s.header(i)));
        validate_tuple(t, s, scn_.catalog);
        return Fact{sid, std::move(t)};
    }

    Rational parse_prob_attr(const std::string& word) const {
        if (word.rfind("p=", 0) != 0) fail("expected 'p=<prob>', got '" + word + "'");
        const Rational p = Rational::parse(word.substr(2));
        if (p < Rational(0) || p > Rational(1)) fail("probability out of [0,1]: " + word);
        return p;
    }

    // ---- schema ----

    void begin_schema(const std::string& name) {
        if (name.empty()) fail("schema needs a name");
        section_ = Section::Schema;
        cur_headers_.clear();
    }

    void schema_line(const std::string& text) {
        const auto ws = words(text);
        if (ws.size() < 4 || ws[0] != "column")
            fail("expected 'column NAME CLASS GROUP [key=value...]'");
        Header h;
        h.name = ws[1];
        if (ws[2] == "nominal") h.cls = HeaderClass::Nominal;
        else if (ws[2] == "numerval") h.cls = HeaderClass::Numerval;
        else if (ws[2] == "numerical") h.cls = HeaderClass::Numerical;
        else if (ws[2] == "taxoral") h.cls = HeaderClass::Taxoral;
        else fail("unknown header class '" + ws[2] + "'");
        if (ws[3] == "identifier") h.group = AttributeGroup::Identifier;
        else if (ws[3] == "qi") h.group = AttributeGroup::QuasiIdentifier;
        else if (ws[3] == "sensitive") h.group = AttributeGroup::Sensitive;
        else fail("unknown attribute group '" + ws[3] + "'");

        for (std::size_t i = 4; i < ws.size(); ++i) {
            const auto eq = ws[i].find('=');
            if (eq == std::string::npos) fail("expected key=value, got '" + ws[i] + "'");
            const std::string key = ws[i].substr(0, eq);
            const std::string value = ws[i].substr(eq + 1);
            try {
                if (key == "taxonomy") h.taxonomy = value;
                else if (key == "normalizer") h.normalizer = Rational::parse(value);
                else if (key == "dmax") h.ceiling = std::stoll(value);
                else fail("unknown column attribute '" + key + "'");
            } catch (const ScenarioError&) {
                throw;
            } catch (const std::exception&) {
                fail("bad value '" + value + "' for column attribute '" + key + "'");
            }
        }
        if (h.cls == HeaderClass::Numerval && !h.ceiling)
            h.ceiling = scn_.options.default_ceiling;
        if (h.cls == HeaderClass::Taxoral && h.taxonomy &&
            !scn_.catalog.has_taxonomy(*h.taxonomy))
            fail("taxonomy '" + *h.taxonomy + "' must be declared before schema use");
        cur_headers_.push_back(std::move(h));
    }

    void flush_schema() {
        try {
            scn_.catalog.add_schema(Schema(section_name_, cur_headers_));
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }

    // ---- taxonomy ----

    void begin_taxonomy(const std::string& name) {
        if (name.empty()) fail("taxonomy needs a name");
        section_ = Section::Taxonomy;
        cur_tax_.emplace(name);
    }

    void taxonomy_line(const std::string& text) {
        const auto ws = words(text);
        try {
            if (ws.size() == 2 && ws[0] == "root") {
                cur_tax_->add_root(unquote(ws[1]));
            } else if (ws.size() == 4 && ws[0] == "node" && ws[2] == "under") {
                cur_tax_->add_node(unquote(ws[1]), unquote(ws[3]));
            } else {
                fail("expected 'root LABEL' or 'node LABEL under PARENT'");
            }
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    void flush_taxonomy() {
        if (cur_tax_->size() == 0) fail("taxonomy '" + cur_tax_->name() + "' has no nodes");
        scn_.catalog.add_taxonomy(std::move(*cur_tax_));
        cur_tax_.reset();
    }

    // ---- databases & externals ----

    void begin_database(const std::string& name, bool external) {
        if (name.empty()) fail("database needs a name");
        const auto schema_attr = attrs_.find("schema");
        if (schema_attr == attrs_.end()) fail("database needs schema=<name>");
        const int sid = scn_.catalog.schema_id(schema_attr->second);
        if (sid < 0) fail("unknown schema '" + schema_attr->second + "'");

        section_ = external ? Section::External : Section::Database;
        auto& map = external ? scn_.externals : scn_.databases;
        if (map.count(name) || (external ? scn_.databases : scn_.externals).count(name))
            fail("duplicate database name '" + name + "'");
        map.emplace(name, Database(sid));
        cur_db_ = &map.at(name);
        if (!external) {
            std::string role = "published";
            const auto r = attrs_.find("role");
            if (r != attrs_.end()) role = r->second;
            if (role != "published" && role != "secret")
                fail("database role must be 'published' or 'secret'");
            scn_.database_roles[name] = role;
        }
    }

    void database_line(const std::string& text) {
        const Schema& s = scn_.catalog.schema(cur_db_->schema_id());
        if (text.rfind("row", 0) == 0 && text.size() > 3 &&
            std::isspace(static_cast<unsigned char>(text[3]))) {
            const auto cells = split_top_level(text.substr(4), ',');
            if (cells.size() != s.arity())
                fail("row has " + std::to_string(cells.size()) + " cells, schema '" + s.name() +
                     "' has " + std::to_string(s.arity()));
            Tuple t;
            for (std::size_t i = 0; i < cells.size(); ++i)
                t.cells.push_back(parse_cell(cells[i], s.header(i)));
            try {
                cur_db_->append(std::move(t), scn_.catalog);
            } catch (const std::invalid_argument& e) {
                fail(e.what());
            }
            return;
        }
        if (text.rfind("csv", 0) == 0) {
            const auto ws = words(text);
            if (ws.size() != 2) fail("expected 'csv PATH'");
            load_csv_rows(ws[1], s);
            return;
        }
        fail("expected 'row cells...' or 'csv PATH'");
    }

    void load_csv_rows(const std::string& rel_path, const Schema& s) {
        CsvTable table;
        try {
            table = read_csv_file(base_dir_ + "/" + rel_path);
        } catch (const std::exception& e) {
            fail(e.what());
        }
        if (table.header.size() != s.arity()) fail("csv header width differs from schema");
        for (std::size_t i = 0; i < s.arity(); ++i)
            if (trim(table.header[i]) != s.header(i).name)
                fail("csv header '" + table.header[i] + "' does not match schema header '" +
                     s.header(i).name + "'");
        for (const auto& row : table.rows) {
            Tuple t;
            for (std::size_t i = 0; i < row.size(); ++i)
                t.cells.push_back(parse_cell(row[i], s.header(i)));
            try {
                cur_db_->append(std::move(t), scn_.catalog);
            } catch (const std::invalid_argument& e) {
                fail(e.what());
            }
        }
    }

    // ---- policy & target ----

    void policy_line(const std::string& text) {
        if (text.rfind("deny", 0) != 0) fail("expected 'deny schema: cells'");
        const Fact f = parse_fact(trim(text.substr(4)));
        try {
            scn_.policy.push_back(make_policy_atom(f.schema_id, f.tuple, scn_.catalog));
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    void begin_target(const std::string& name) {
        section_ = Section::Target;
        section_name_ = name;
        if (scn_.targets.count(name)) fail("duplicate target '" + name + "'");
        scn_.targets[name] = {};
    }

    void target_line(const std::string& text) {
        if (text.rfind("tuple", 0) != 0) fail("expected 'tuple schema: cells'");
        scn_.targets[section_name_].push_back(parse_fact(trim(text.substr(5))));
    }

    // ---- rules ----

    SourceRef parse_source(const std::vector<std::string>& ws, std::size_t& i) const {
        if (i >= ws.size()) fail("missing rule source");
        SourceRef src;
        if (ws[i] == "tag") src.kind = SourceRef::Kind::TagSchema;
        else if (ws[i] == "external") src.kind = SourceRef::Kind::External;
        else if (ws[i] == "rule") src.kind = SourceRef::Kind::Rule;
        else fail("rule source must be 'tag S', 'external N' or 'rule R', got '" + ws[i] + "'");
        if (++i >= ws.size()) fail("missing source name");
        src.name = ws[i++];
        return src;
    }

    // Schema hosting a source's rows (already-declared ones only).
    const Schema& source_schema(const SourceRef& src) const {
        switch (src.kind) {
            case SourceRef::Kind::TagSchema: {
                const int sid = scn_.catalog.schema_id(src.name);
                if (sid < 0) fail("unknown schema '" + src.name + "'");
                return scn_.catalog.schema(sid);
            }
            case SourceRef::Kind::External: {
                const auto it = scn_.externals.find(src.name);
                if (it == scn_.externals.end()) fail("unknown external '" + src.name + "'");
                return scn_.catalog.schema(it->second.schema_id());
            }
            case SourceRef::Kind::Rule: {
                for (const DeductionRule& r : scn_.rules)
                    if (rule_name(r) == src.name) {
                        if (const auto* sel = std::get_if<SelectRule>(&r))
                            return source_schema(sel->src);
                        if (const auto* un = std::get_if<UnionRule>(&r))
                            return source_schema(un->left);
                        if (const auto* df = std::get_if<DiffRule>(&r))
                            return source_schema(df->left);
                        fail("rule '" + src.name +
                             "' output cannot be filtered here (project/join outputs "
                             "have derived schemas)");
                    }
                fail("rule '" + src.name + "' is not defined earlier");
            }
        }
        fail("unreachable");
    }

    std::vector<Predicate> parse_where(const std::vector<std::string>& ws, std::size_t i,
                                       const Schema& s) const {
        std::vector<Predicate> out;
        if (i >= ws.size()) return out;
        if (ws[i] != "where") fail("expected 'where', got '" + ws[i] + "'");
        ++i;
        while (i < ws.size()) {
            if (ws.size() - i < 3) fail("incomplete predicate");
            Predicate p;
            p.header = ws[i];
            const std::string& op = ws[i + 1];
            if (op == "=") p.cmp = Predicate::Cmp::Eq;
            else if (op == "!=") p.cmp = Predicate::Cmp::Ne;
            else if (op == "<=") p.cmp = Predicate::Cmp::Le;
            else if (op == ">=") p.cmp = Predicate::Cmp::Ge;
            else if (op == "<") p.cmp = Predicate::Cmp::Lt;
            else if (op == ">") p.cmp = Predicate::Cmp::Gt;
            else fail("unknown comparison '" + op + "'");
            // The cell may have been split on spaces; rejoin until 'and'.
            std::string cell = ws[i + 2];
            i += 3;
            while (i < ws.size() && ws[i] != "and") cell += " " + ws[i++];
            if (i < ws.size()) ++i;  // skip 'and'
            p.constant = parse_cell(cell, s.require(p.header));
            out.push_back(std::move(p));
        }
        return out;
    }

    Term parse_term(const std::string& w) const {
        if (looks_numeric(w)) return Term(Rational::parse(w));
        return Term(w);
    }

    void rule_line(const std::string& text) {
        const auto ws = words(text);
        if (ws.size() < 3 || ws[2] != "=")
            fail("expected '<kind> <name> = ...'");
        const std::string& kind = ws[0];
        const std::string& name = ws[1];
        if (scn_.catalog.schema_id(name) >= 0)
            fail("rule name '" + name + "' collides with a schema");
        std::size_t i = 3;

        if (kind == "select") {
            SelectRule r;
            r.name = name;
            r.src = parse_source(ws, i);
            r.where = parse_where(ws, i, source_schema(r.src));
            scn_.rules.push_back(std::move(r));
        } else if (kind == "project") {
            ProjectRule r;
            r.name = name;
            r.src = parse_source(ws, i);
            if (i >= ws.size() || ws[i] != "onto") fail("expected 'onto H1, H2, ...'");
            std::string rest;
            for (++i; i < ws.size(); ++i) rest += ws[i] + " ";
            for (const std::string& h : split_top_level(rest, ','))
                r.headers.push_back(trim(h));
            scn_.rules.push_back(std::move(r));
        } else if (kind == "join" || kind == "union" || kind == "diff") {
            SourceRef left = parse_source(ws, i);
            if (i >= ws.size() || ws[i] != "with") fail("expected 'with <source>'");
            ++i;
            SourceRef right = parse_source(ws, i);
            if (kind == "union") {
                scn_.rules.push_back(UnionRule{name, std::move(left), std::move(right)});
            } else if (kind == "diff") {
                scn_.rules.push_back(DiffRule{name, std::move(left), std::move(right)});
            } else {
                JoinRule r{name, std::move(left), std::move(right), {}};
                if (i < ws.size()) {
                    if (ws[i] != "on") fail("expected 'on H1, H2, ...'");
                    std::string rest;
                    for (++i; i < ws.size(); ++i) rest += ws[i] + " ";
                    for (const std::string& h : split_top_level(rest, ','))
                        r.expect_on.push_back(trim(h));
                }
                scn_.rules.push_back(std::move(r));
            }
        } else if (kind == "agg") {
            AggregateRule r;
            r.name = name;
            if (i >= ws.size()) fail("expected 'count <source>' or 'sum H from <source>'");
            if (ws[i] == "count") {
                r.op = AggregateRule::Op::Count;
                ++i;
                if (i < ws.size() && ws[i] == "*") ++i;  // optional star
                if (i < ws.size() && ws[i] == "from") ++i;
                r.src = parse_source(ws, i);
            } else if (ws[i] == "sum") {
                r.op = AggregateRule::Op::Sum;
                if (++i >= ws.size()) fail("missing SUM header");
                r.header = ws[i];
                if (++i >= ws.size() || ws[i] != "from") fail("expected 'from <source>'");
                ++i;
                r.src = parse_source(ws, i);
            } else {
                fail("aggregate must be 'count' or 'sum'");
            }
            r.where = parse_where(ws, i, source_schema(r.src));
            scn_.rules.push_back(std::move(r));
        } else if (kind == "bound") {
            scn_.rules.push_back(parse_bound(name, ws, i));
        } else {
            fail("unknown rule kind '" + kind + "'");
        }
    }

    BoundRule parse_bound(const std::string& name, const std::vector<std::string>& ws,
                          std::size_t i) const {
        // bound N = SCHEMA: H = CELL [, H = CELL] derive H >= TERM - TERM [when AGG = TERM]
        std::string rest;
        for (; i < ws.size(); ++i) rest += (rest.empty() ? "" : " ") + ws[i];
        const auto colon = rest.find(':');
        if (colon == std::string::npos) fail("expected 'schema: anchors derive ...'");
        BoundRule r;
        r.name = name;
        r.schema = trim(rest.substr(0, colon));
        const int sid = scn_.catalog.schema_id(r.schema);
        if (sid < 0) fail("unknown schema '" + r.schema + "'");
        const Schema& s = scn_.catalog.schema(sid);

        const auto derive_pos = rest.find(" derive ");
        if (derive_pos == std::string::npos) fail("bound rule needs 'derive'");
        for (const std::string& anchor :
             split_top_level(rest.substr(colon + 1, derive_pos - colon - 1), ',')) {
            const auto eq = anchor.find('=');
            if (eq == std::string::npos) fail("anchor must be 'Header = cell'");
            const std::string h = trim(anchor.substr(0, eq));
            r.anchors.emplace_back(h, parse_cell(anchor.substr(eq + 1), s.require(h)));
        }

        std::string tail = trim(rest.substr(derive_pos + 8));
        std::optional<std::string> when;
        const auto when_pos = tail.find(" when ");
        if (when_pos != std::string::npos) {
            when = trim(tail.substr(when_pos + 6));
            tail = trim(tail.substr(0, when_pos));
        }
        const auto tws = words(tail);
        if (tws.size() != 5 || tws[1] != ">=" || tws[3] != "-")
            fail("expected 'derive H >= TERM - TERM'");
        r.target_header = tws[0];
        r.lhs = parse_term(tws[2]);
        r.rhs = parse_term(tws[4]);
        if (when) {
            const auto wws = words(*when);
            if (wws.size() != 3 || wws[1] != "=") fail("expected 'when AGG = TERM'");
            r.guard = std::make_pair(wws[0], parse_term(wws[2]));
        }
        return r;
    }

    // ---- script ----

    void script_line(const std::string& text) {
        const auto ws = words(text);
        if (ws[0] == "step") {
            flush_step();
            cur_step_.emplace();
            cur_step_line_ = line_;
            if (ws.size() > 1) cur_step_->label = unquote(ws[1]);
            return;
        }
        if (!cur_step_) fail("'" + ws[0] + "' before any 'step'");
        if (ws[0] == "branch") {
            if (ws.size() != 2) fail("expected 'branch p=<prob>'");
            cur_step_->branches.push_back(ScriptBranch{parse_prob_attr(ws[1]), {}});
            return;
        }
        if (ws[0] == "add") {
            if (cur_step_->branches.empty()) fail("'add' before any 'branch'");
            cur_step_->branches.back().adds.push_back(parse_fact(trim(text.substr(3))));
            return;
        }
        fail("expected 'step', 'branch' or 'add'");
    }

    void flush_step() {
        if (!cur_step_) return;
        if (cur_step_->branches.empty()) fail("step without branches");
        Rational sum;
        for (const ScriptBranch& b : cur_step_->branches) sum += b.prob;
        if (sum != Rational(1)) {
            line_ = cur_step_line_;
            fail("branch probabilities sum to " + sum.to_string() + ", expected 1");
        }
        scn_.script.push_back(std::move(*cur_step_));
        cur_step_.reset();
    }

    // ---- mechanism ----

    void begin_mechanism(const std::string& name) {
        if (scn_.mechanism) fail("only one mechanism per scenario");
        section_ = Section::Mechanism;
        mech_name_ = name.empty() ? "mechanism" : name;
        mech_inputs_.clear();
        mech_outputs_.clear();
        mech_rows_.clear();
        mech_input_facts_.clear();
        mech_output_facts_.clear();
    }

    void mechanism_line(const std::string& text) {
        const auto ws = words(text);
        if (ws[0] == "inputs" || ws[0] == "outputs") {
            auto& list = ws[0] == "inputs" ? mech_inputs_ : mech_outputs_;
            for (const std::string& n : split_top_level(text.substr(ws[0].size()), ','))
                list.push_back(trim(n));
            return;
        }
        if (ws[0] == "input" || ws[0] == "output") {
            const auto eq = text.find('=');
            if (eq == std::string::npos) fail("expected '" + ws[0] + " NAME = schema: cells'");
            const std::string label = trim(text.substr(ws[0].size(), eq - ws[0].size()));
            const Fact f = parse_fact(trim(text.substr(eq + 1)));
            if (ws[0] == "input") {
                mech_inputs_.push_back(label);
                mech_input_facts_[label] = f;
            } else {
                mech_outputs_.push_back(label);
                mech_output_facts_[label] = f;
            }
            return;
        }
        if (ws[0] == "row") {
            const auto colon = text.find(':');
            if (colon == std::string::npos) fail("expected 'row INPUT: p1, p2, ...'");
            const std::string label = trim(text.substr(3, colon - 3));
            std::vector<Rational> row;
            for (const std::string& p : split_top_level(text.substr(colon + 1), ','))
                row.push_back(Rational::parse(p));
            if (!mech_rows_.emplace(label, std::move(row)).second)
                fail("duplicate row for input '" + label + "'");
            return;
        }
        fail("expected 'inputs', 'outputs', 'input', 'output' or 'row'");
    }

    void flush_mechanism() {
        if (mech_inputs_.empty() || mech_outputs_.empty())
            fail("mechanism '" + mech_name_ + "' needs inputs and outputs");
        std::vector<std::vector<Rational>> rows;
        for (const std::string& v : mech_inputs_) {
            const auto it = mech_rows_.find(v);
            if (it == mech_rows_.end()) fail("missing row for input '" + v + "'");
            rows.push_back(it->second);
        }
        if (mech_rows_.size() != mech_inputs_.size()) fail("row for an undeclared input");
        try {
            FiniteMechanism m(mech_inputs_, mech_outputs_, std::move(rows));
            for (const auto& [label, fact] : mech_input_facts_) {
                Database db(fact.schema_id);
                db.append(fact.tuple, scn_.catalog);
                m.bind_input(label, std::move(db));
            }
            for (const auto& [label, fact] : mech_output_facts_) m.bind_output(label, fact);
            scn_.mechanism.emplace(std::move(m));
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    // ---- compare ----

    void compare_line(const std::string& text) {
        const auto ws = words(text);
        if (ws[0] == "config") {
            flush_compare_config();
            if (ws.size() != 3 || (ws[1] != "1" && ws[1] != "2"))
                fail("expected 'config 1|2 p=<prob>'");
            cur_config_.emplace();
            cur_config_index_ = ws[1] == "1" ? 0 : 1;
            cur_config_->parent_prob = parse_prob_attr(ws[2]);
            return;
        }
        if (!cur_config_) fail("'" + ws[0] + "' before any 'config'");
        if (ws[0] == "parent") {
            const Fact f = parse_fact(trim(text.substr(6)));
            cur_config_->parent_tag.insert(f, Provenance::Answered);
            return;
        }
        if (ws[0] == "successor") {
            if (ws.size() != 2) fail("expected 'successor p=<prob>'");
            cur_config_->successors.push_back(
                CompareConfig::Successor{cur_config_->parent_tag, parse_prob_attr(ws[1])});
            return;
        }
        if (ws[0] == "add") {
            if (cur_config_->successors.empty()) fail("'add' before any 'successor'");
            cur_config_->successors.back().tag.insert(parse_fact(trim(text.substr(3))),
                                                      Provenance::Answered);
            return;
        }
        fail("expected 'config', 'parent', 'successor' or 'add'");
    }

    void flush_compare_config() {
        if (!cur_config_) return;
        if (cur_config_->successors.empty()) fail("config without successors");
        Rational sum;
        for (const auto& s : cur_config_->successors) sum += s.prob;
        if (sum != Rational(1))
            fail("successor probabilities sum to " + sum.to_string() + ", expected 1");
        if (!scn_.compare) {
            // First flushed config: park it until its sibling arrives.
            if (cur_config_index_ != 0) fail("config 1 must come before config 2");
            scn_.compare.emplace(std::move(*cur_config_), CompareConfig{});
        } else {
            if (cur_config_index_ != 1) fail("duplicate config 1");
            scn_.compare->second = std::move(*cur_config_);
        }
        cur_config_.reset();
    }

    // ---- final validation ----

    void finalize() {
        if (scn_.compare && scn_.compare->second.successors.empty())
            fail("compare section needs both config 1 and config 2");
        try {
            scn_.resolved = ResolvedRules::resolve(scn_.catalog, scn_.rules, scn_.externals);
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(origin_ + ": " + e.what());
        }
        check_normalizers();
    }

    // Same-named numerical headers must share one normalizer D, and D must
    // exceed the largest numeric gap observed anywhere in the scenario.
    void check_normalizers() {
        std::map<std::string, Rational> normalizer;
        for (std::size_t sid = 0; sid < scn_.catalog.schema_count(); ++sid)
            for (const Header& h : scn_.catalog.schema(static_cast<int>(sid)).headers()) {
                if (h.cls != HeaderClass::Numerical) continue;
                const auto [it, fresh] = normalizer.emplace(h.name, *h.normalizer);
                if (!fresh && it->second != *h.normalizer)
                    throw ScenarioError(origin_ + ": numerical header '" + h.name +
                                        "' has conflicting normalizers across schemas");
            }
        if (normalizer.empty()) return;

        std::map<std::string, std::pair<Rational, Rational>> ranges;  // header -> (min, max)
        const auto see = [&](const Fact& f) {
            const Schema& s = scn_.catalog.schema(f.schema_id);
            for (std::size_t i = 0; i < s.arity(); ++i) {
                const Header& h = s.header(i);
                if (h.cls != HeaderClass::Numerical) continue;
                const Value& v = f.tuple.cells[i];
                if (v.kind() != Value::Kind::Number) continue;
                const Rational& x = v.as_number();
                auto [it, fresh] = ranges.emplace(h.name, std::make_pair(x, x));
                if (!fresh) {
                    it->second.first = std::min(it->second.first, x);
                    it->second.second = std::max(it->second.second, x);
                }
            }
        };
        for (const auto& [n, db] : scn_.databases)
            for (const Tuple& t : db.rows()) see(Fact{db.schema_id(), t});
        for (const auto& [n, db] : scn_.externals)
            for (const Tuple& t : db.rows()) see(Fact{db.schema_id(), t});
        for (const auto& [n, facts] : scn_.targets)
            for (const Fact& f : facts) see(f);
        for (const PolicyAtom& p : scn_.policy) see(Fact{p.schema_id, p.pattern});
        for (const ScriptStep& st : scn_.script)
            for (const ScriptBranch& b : st.branches)
                for (const Fact& f : b.adds) see(f);

        for (const auto& [name, range] : ranges) {
            const Rational gap = range.second - range.first;
            if (!(normalizer.at(name) > gap))
                throw ScenarioError(origin_ + ": normalizer of '" + name + "' (" +
                                    normalizer.at(name).to_string() +
                                    ") must exceed the observed gap " + gap.to_string());
        }
    }

    // ---- state ----

    Scenario scn_;
    std::string origin_, base_dir_;
    std::vector<Line> lines_;
    int line_ = 0;

    Section section_ = Section::None;
    std::string section_name_;
    std::map<std::string, std::string> attrs_;

    std::vector<Header> cur_headers_;
    std::optional<Taxonomy> cur_tax_;
    Database* cur_db_ = nullptr;
    std::optional<ScriptStep> cur_step_;
    int cur_step_line_ = 0;

    std::string mech_name_;
    std::vector<std::string> mech_inputs_, mech_outputs_;
    std::map<std::string, std::vector<Rational>> mech_rows_;
    std::map<std::string, Fact> mech_input_facts_, mech_output_facts_;

    std::optional<CompareConfig> cur_config_;
    int cur_config_index_ = 0;
};

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& origin,
                        const LoadOverrides& overrides, const std::string& base_dir) {
    Parser p(text, origin, overrides, base_dir);
    return p.run();
}

Scenario load_scenario(const std::string& path, const LoadOverrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();

    std::string base_dir = ".";
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) base_dir = path.substr(0, slash);

    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    return parse_scenario(buf.str(), name, overrides, base_dir);
}

}  // namespace privtrace
