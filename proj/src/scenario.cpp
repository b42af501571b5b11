#include "qshare/scenario.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace qshare {

namespace detail {
// Defined in the generated bundled_scenarios.cpp.
const std::vector<std::pair<std::string, std::string>>& bundled_table();
}  // namespace detail

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string msg = "scenario has " + std::to_string(problems.size()) + " problem(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    return msg;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

const std::vector<std::string>& channel_names() {
    static const std::vector<std::string> names = {"theta", "omega_dev", "f",  "v",       "lambda",  "zeta", "V",
                                                   "P",     "Q",         "P_ratio", "Q_ratio", "rho"};
    return names;
}

bool operator==(const TuningSpec& a, const TuningSpec& b) {
    return a.delta_f_max_pu == b.delta_f_max_pu && a.rocof_star == b.rocof_star && a.tau_p == b.tau_p &&
           a.k_d == b.k_d && a.beta_error_budget == b.beta_error_budget && a.tau_d_floor == b.tau_d_floor &&
           a.beta_cap == b.beta_cap;
}

bool operator==(const ScenarioFile& a, const ScenarioFile& b) {
    const auto& x = a.scenario;
    const auto& y = b.scenario;
    return x.name == y.name && x.network == y.network && x.graph == y.graph && x.params == y.params &&
           x.settings == y.settings && x.events == y.events && x.initial == y.initial && a.outputs == b.outputs &&
           a.tuning == b.tuning;
}

namespace {

struct Row {
    int line = 0;
    std::vector<std::string> tokens;
    std::string raw;  // text after the first '=' for key/value rows
    std::string key;
};

struct Section {
    std::string name;
    int line = 0;
    std::map<std::string, std::string> attrs;
    std::vector<Row> rows;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

const std::set<std::string> kTableSections = {"buses", "lines", "connectors", "loads", "ibrs", "graph", "events"};
const std::set<std::string> kKeyValueSections = {"scenario", "bases",   "controller", "initial",
                                                 "simulation", "outputs", "tuning"};

class Parser {
  public:
    Parser(const std::string& text, std::string origin) : origin_(std::move(origin)) { split(text); }

    ScenarioFile build();

  private:
    std::string origin_;
    std::vector<Section> sections_;
    std::vector<std::string> errors_;

    void error(int line, const std::string& section, const std::string& msg) {
        std::ostringstream os;
        os << origin_ << ":" << line;
        if (!section.empty()) os << " [" << section << "]";
        os << ": " << msg;
        errors_.push_back(os.str());
    }

    void split(const std::string& text);
    const Section* find(const std::string& name) const {
        for (const auto& s : sections_)
            if (s.name == name) return &s;
        return nullptr;
    }

    bool number(const Row& r, const Section& s, const std::string& tok, double& out) {
        const char* b = tok.c_str();
        char* e = nullptr;
        errno = 0;
        const double v = std::strtod(b, &e);
        if (e == b || *e != '\0' || errno == ERANGE || !std::isfinite(v)) {
            error(r.line, s.name, "'" + tok + "' is not a finite number");
            return false;
        }
        out = v;
        return true;
    }

    bool integer(const Row& r, const Section& s, const std::string& tok, int& out) {
        double v = 0.0;
        if (!number(r, s, tok, v)) return false;
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            error(r.line, s.name, "'" + tok + "' is not an integer");
            return false;
        }
        out = static_cast<int>(v);
        return true;
    }

    /// Key/value pairs of a section with unknown keys reported.
    std::map<std::string, const Row*> keys(const Section& s, const std::set<std::string>& allowed) {
        std::map<std::string, const Row*> out;
        for (const auto& r : s.rows) {
            if (!allowed.count(r.key)) {
                error(r.line, s.name, "unknown key '" + r.key + "'");
                continue;
            }
            if (out.count(r.key)) {
                error(r.line, s.name, "duplicate key '" + r.key + "'");
                continue;
            }
            out[r.key] = &r;
        }
        return out;
    }

    void read_double(const Section& s, const std::map<std::string, const Row*>& kv, const std::string& key,
                     double& target) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        double v = 0.0;
        if (number(*it->second, s, it->second->raw, v)) target = v;
    }

    bool field_count(const Section& s, const Row& r, std::size_t lo, std::size_t hi) {
        if (r.tokens.size() < lo || r.tokens.size() > hi) {
            std::ostringstream os;
            os << "expected " << lo;
            if (hi != lo) os << " to " << hi;
            os << " fields, found " << r.tokens.size();
            error(r.line, s.name, os.str());
            return false;
        }
        return true;
    }

    Vec vector_value(const Section& s, const Row& r) {
        std::string text = r.raw;
        std::replace(text.begin(), text.end(), ',', ' ');
        const auto toks = split_ws(text);
        Vec out(static_cast<Eigen::Index>(toks.size()));
        for (std::size_t i = 0; i < toks.size(); ++i) {
            double v = 0.0;
            number(r, s, toks[i], v);
            out(static_cast<Eigen::Index>(i)) = v;
        }
        return out;
    }
};

void Parser::split(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    constexpr std::ptrdiff_t kSkip = -2;
    std::ptrdiff_t current = -1;  // index into sections_
    std::set<std::string> seen;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            const auto close = line.find(']');
            if (close == std::string::npos) {
                error(lineno, "", "unterminated section header");
                current = -1;
                continue;
            }
            Section s;
            s.name = trim(line.substr(1, close - 1));
            s.line = lineno;
            if (!kTableSections.count(s.name) && !kKeyValueSections.count(s.name)) {
                error(lineno, "", "unknown section [" + s.name + "]");
                current = kSkip;
                continue;
            }
            if (seen.count(s.name)) {
                error(lineno, s.name, "section appears more than once");
                current = kSkip;
                continue;
            }
            seen.insert(s.name);
            for (const auto& tok : split_ws(line.substr(close + 1))) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos || eq == 0) {
                    error(lineno, s.name, "malformed section attribute '" + tok + "'");
                    continue;
                }
                s.attrs[tok.substr(0, eq)] = tok.substr(eq + 1);
            }
            sections_.push_back(std::move(s));
            current = static_cast<std::ptrdiff_t>(sections_.size()) - 1;
            continue;
        }
        if (current == kSkip) continue;  // body of a rejected section
        if (current < 0) {
            error(lineno, "", "content outside of a section");
            continue;
        }
        Row r;
        r.line = lineno;
        if (kKeyValueSections.count(sections_[static_cast<std::size_t>(current)].name)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                error(lineno, sections_[static_cast<std::size_t>(current)].name, "expected 'key = value'");
                continue;
            }
            r.key = trim(line.substr(0, eq));
            r.raw = trim(line.substr(eq + 1));
            if (r.key.empty() || r.raw.empty()) {
                error(lineno, sections_[static_cast<std::size_t>(current)].name, "expected 'key = value'");
                continue;
            }
        } else {
            r.tokens = split_ws(line);
        }
        sections_[static_cast<std::size_t>(current)].rows.push_back(std::move(r));
    }
}

ScenarioFile Parser::build() {
    for (const char* req : {"bases", "buses", "connectors", "ibrs", "graph"})
        if (!find(req)) errors_.push_back(origin_ + ": missing required section [" + std::string(req) + "]");

    NetworkData net;
    ControllerParams params;
    SimulationSettings settings;
    InitialState initial;
    OutputSpec outputs;
    std::optional<TuningSpec> tuning;
    std::vector<Event> events;
    std::vector<Edge> edges;
    std::vector<int> edge_lines;
    std::string name = "scenario";

    auto check_attrs = [&](const Section& s, const std::set<std::string>& allowed) {
        for (const auto& [k, v] : s.attrs)
            if (!allowed.count(k)) error(s.line, s.name, "unknown attribute '" + k + "'");
    };
    auto impedance_unit = [&](const Section& s) {
        check_attrs(s, {"unit"});
        auto it = s.attrs.find("unit");
        if (it == s.attrs.end()) {
            error(s.line, s.name, "unit must be declared (unit=ohm or unit=pu)");
            return ImpedanceUnit::PerUnit;
        }
        if (it->second == "ohm") return ImpedanceUnit::Ohm;
        if (it->second != "pu") error(s.line, s.name, "unit must be 'ohm' or 'pu'");
        return ImpedanceUnit::PerUnit;
    };

    for (const auto& s : sections_) {
        if (s.name == "scenario") {
            check_attrs(s, {});
            auto kv = keys(s, {"name"});
            if (kv.count("name")) name = kv["name"]->raw;
        } else if (s.name == "bases") {
            check_attrs(s, {});
            auto kv = keys(s, {"s_base", "v_base", "f_nom", "phases"});
            for (const char* k : {"s_base", "v_base", "f_nom"})
                if (!kv.count(k)) error(s.line, s.name, std::string("missing key '") + k + "'");
            read_double(s, kv, "s_base", net.bases.s_base_va);
            read_double(s, kv, "v_base", net.bases.v_base_v);
            read_double(s, kv, "f_nom", net.bases.f_nom_hz);
            if (kv.count("phases")) {
                const Row& r = *kv["phases"];
                if (r.raw == "1") net.bases.phases = 1;
                else if (r.raw == "3") net.bases.phases = 3;
                else error(r.line, s.name, "phases must be 1 or 3");
            }
        } else if (s.name == "buses") {
            check_attrs(s, {});
            for (const auto& r : s.rows) {
                if (!field_count(s, r, 2, 2)) continue;
                Bus b;
                if (!integer(r, s, r.tokens[0], b.id)) continue;
                try {
                    b.kind = bus_kind_from_string(r.tokens[1]);
                } catch (const Error& e) {
                    error(r.line, s.name, e.what());
                    continue;
                }
                net.buses.push_back(b);
            }
        } else if (s.name == "lines") {
            net.line_unit = impedance_unit(s);
            for (const auto& r : s.rows) {
                if (!field_count(s, r, 4, 4)) continue;
                Line l;
                if (integer(r, s, r.tokens[0], l.from) & integer(r, s, r.tokens[1], l.to) &
                    number(r, s, r.tokens[2], l.r) & number(r, s, r.tokens[3], l.x))
                    net.lines.push_back(l);
            }
        } else if (s.name == "connectors") {
            net.connector_unit = impedance_unit(s);
            for (const auto& r : s.rows) {
                if (!field_count(s, r, 4, 4)) continue;
                Connector c;
                if (integer(r, s, r.tokens[0], c.ibr) & integer(r, s, r.tokens[1], c.bus) &
                    number(r, s, r.tokens[2], c.r) & number(r, s, r.tokens[3], c.x))
                    net.connectors.push_back(c);
            }
        } else if (s.name == "loads") {
            check_attrs(s, {"unit"});
            auto it = s.attrs.find("unit");
            if (it == s.attrs.end()) {
                error(s.line, s.name, "unit must be declared (unit=pu or unit=va)");
            } else if (it->second == "va") {
                net.load_unit = PowerUnit::VoltAmpere;
            } else if (it->second != "pu") {
                error(s.line, s.name, "unit must be 'pu' or 'va'");
            }
            for (const auto& r : s.rows) {
                if (!field_count(s, r, 3, 3)) continue;
                Load ld;
                if (integer(r, s, r.tokens[0], ld.bus) & number(r, s, r.tokens[1], ld.s) &
                    number(r, s, r.tokens[2], ld.pf))
                    net.loads.push_back(ld);
            }
        } else if (s.name == "ibrs") {
            check_attrs(s, {});
            int expected = 1;
            for (const auto& r : s.rows) {
                if (!field_count(s, r, 6, 6)) continue;
                int idx = 0;
                IbrParams p;
                if (!(integer(r, s, r.tokens[0], idx) & number(r, s, r.tokens[1], p.s_rated) &
                      number(r, s, r.tokens[2], p.m_omega) & number(r, s, r.tokens[3], p.m_v) &
                      number(r, s, r.tokens[4], p.v_min) & number(r, s, r.tokens[5], p.v_max)))
                    continue;
                if (idx != expected) error(r.line, s.name, "IBR rows must be numbered 1, 2, ... in order");
                ++expected;
                params.ibrs.push_back(p);
            }
        } else if (s.name == "graph") {
            check_attrs(s, {});
            for (const auto& r : s.rows) {
                if (!field_count(s, r, 2, 3)) continue;
                int i = 0, j = 0;
                double w = 1.0;
                bool ok = integer(r, s, r.tokens[0], i) & integer(r, s, r.tokens[1], j);
                if (r.tokens.size() == 3) ok = number(r, s, r.tokens[2], w) && ok;
                if (!ok) continue;
                if (i < 1 || j < 1) {
                    error(r.line, s.name, "node indices are 1-based");
                    continue;
                }
                edges.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), w});
                edge_lines.push_back(r.line);
            }
        } else if (s.name == "controller") {
            check_attrs(s, {});
            auto kv = keys(s, {"tau_omega", "tau_v", "tau_p", "tau_d", "beta", "k"});
            auto& g = params.gains;
            read_double(s, kv, "tau_omega", g.tau_omega);
            read_double(s, kv, "tau_v", g.tau_v);
            read_double(s, kv, "tau_p", g.tau_p);
            read_double(s, kv, "tau_d", g.tau_d);
            read_double(s, kv, "beta", g.beta);
            read_double(s, kv, "k", g.k);
        } else if (s.name == "initial") {
            check_attrs(s, {});
            auto kv = keys(s, {"mode", "theta", "omega", "v", "lambda", "zeta"});
            if (kv.count("mode")) {
                const auto& m = kv["mode"]->raw;
                if (m == "droop") initial.mode = ControlMode::Droop;
                else if (m == "proposed") initial.mode = ControlMode::Proposed;
                else error(kv["mode"]->line, s.name, "mode must be 'droop' or 'proposed'");
            }
            if (kv.count("theta")) initial.theta = vector_value(s, *kv["theta"]);
            if (kv.count("omega")) initial.omega = vector_value(s, *kv["omega"]);
            if (kv.count("v")) initial.v = vector_value(s, *kv["v"]);
            if (kv.count("lambda")) initial.lambda = vector_value(s, *kv["lambda"]);
            if (kv.count("zeta")) initial.zeta = vector_value(s, *kv["zeta"]);
        } else if (s.name == "events") {
            check_attrs(s, {});
            for (const auto& r : s.rows) {
                if (r.tokens.size() < 2) {
                    error(r.line, s.name, "expected '<time> <kind> ...'");
                    continue;
                }
                Event e;
                if (!number(r, s, r.tokens[0], e.time)) continue;
                const auto& kind = r.tokens[1];
                if (kind == "activate") {
                    if (!field_count(s, r, 2, 2)) continue;
                    e.kind = EventKind::ActivateController;
                } else if (kind == "scale-load") {
                    if (!field_count(s, r, 4, 4)) continue;
                    e.kind = EventKind::ScaleLoad;
                    if (!(integer(r, s, r.tokens[2], e.bus) & number(r, s, r.tokens[3], e.factor))) continue;
                } else if (kind == "set-limits") {
                    if (!field_count(s, r, 5, 5)) continue;
                    e.kind = EventKind::SetLimits;
                    bool ok = true;
                    if (r.tokens[2] == "all") e.ibr = 0;
                    else ok = integer(r, s, r.tokens[2], e.ibr);
                    if (!(ok & number(r, s, r.tokens[3], e.v_min) & number(r, s, r.tokens[4], e.v_max))) continue;
                    if (r.tokens[2] != "all" && e.ibr < 1) {
                        error(r.line, s.name, "set-limits target must be 'all' or a 1-based IBR index");
                        continue;
                    }
                } else {
                    error(r.line, s.name, "unknown event kind '" + kind + "'");
                    continue;
                }
                events.push_back(e);
            }
        } else if (s.name == "simulation") {
            check_attrs(s, {});
            auto kv = keys(s, {"t_end", "rel_tol", "abs_tol", "max_step", "sample_period"});
            read_double(s, kv, "t_end", settings.t_end);
            read_double(s, kv, "rel_tol", settings.rel_tol);
            read_double(s, kv, "abs_tol", settings.abs_tol);
            read_double(s, kv, "max_step", settings.max_step);
            read_double(s, kv, "sample_period", settings.sample_s);
        } else if (s.name == "outputs") {
            check_attrs(s, {});
            auto kv = keys(s, {"dir", "channels"});
            if (kv.count("dir")) outputs.directory = kv["dir"]->raw;
            if (kv.count("channels")) {
                std::string text = kv["channels"]->raw;
                std::replace(text.begin(), text.end(), ',', ' ');
                const auto toks = split_ws(text);
                if (!(toks.size() == 1 && toks[0] == "all")) {
                    for (const auto& c : toks) {
                        if (std::find(channel_names().begin(), channel_names().end(), c) == channel_names().end())
                            error(kv["channels"]->line, s.name, "unknown channel '" + c + "'");
                        else
                            outputs.channels.push_back(c);
                    }
                }
            }
        } else if (s.name == "tuning") {
            check_attrs(s, {});
            auto kv = keys(s, {"delta_f_max", "rocof", "tau_p", "k_d", "beta_budget", "tau_d_floor", "beta_cap"});
            TuningSpec t;
            read_double(s, kv, "delta_f_max", t.delta_f_max_pu);
            read_double(s, kv, "rocof", t.rocof_star);
            read_double(s, kv, "tau_p", t.tau_p);
            read_double(s, kv, "k_d", t.k_d);
            read_double(s, kv, "beta_budget", t.beta_error_budget);
            read_double(s, kv, "tau_d_floor", t.tau_d_floor);
            read_double(s, kv, "beta_cap", t.beta_cap);
            for (const auto& e : t.check()) error(s.line, s.name, e);
            tuning = t;
        }
    }

    // Semantic checks run even after syntax errors so that every problem is listed.
    // A rejected connector row must not shift every graph index check.
    const std::size_t n = std::max(net.connectors.size(), params.ibrs.size());
    std::optional<CommGraph> graph;
    {
        const Section* gs = find("graph");
        bool edges_ok = true;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const auto& e = edges[k];
            if (e.from >= n || e.to >= n) {
                std::ostringstream os;
                os << "edge (" << e.from + 1 << ", " << e.to + 1 << ") references a node outside 1.." << n;
                error(edge_lines[k], "graph", os.str());
                edges_ok = false;
            }
        }
        if (gs && edges_ok && n > 0) {
            try {
                graph.emplace(n, edges);
            } catch (const Error& e) {
                errors_.push_back(std::string("graph: ") + e.what());
            }
        }
    }

    NetworkData pu = net;
    try {
        pu = to_per_unit(net);
    } catch (const Error& e) {
        errors_.push_back(std::string("bases: ") + e.what());
    }

    Scenario sc{name, pu, graph ? *graph : CommGraph::complete(std::max<std::size_t>(n, 1)), params, settings,
                events, initial};
    for (auto& e : sc.check()) {
        // Graph mismatch is already reported when the graph could not be built.
        if (!graph && e.rfind("graph:", 0) == 0) continue;
        errors_.push_back(std::move(e));
    }

    if (!errors_.empty()) {
        std::vector<std::string> unique;
        for (auto& e : errors_)
            if (std::find(unique.begin(), unique.end(), e) == unique.end()) unique.push_back(std::move(e));
        throw ScenarioError(std::move(unique));
    }
    return ScenarioFile{std::move(sc), outputs, tuning};
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text, const std::string& origin) {
    return Parser(text, origin).build();
}

ScenarioFile load_scenario(const std::string& path_or_name) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(path_or_name)) {
        std::ifstream in(path_or_name, std::ios::binary);
        if (!in) throw ModelError("cannot open scenario file '" + path_or_name + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_scenario(ss.str(), path_or_name);
    }
    for (const auto& [name, text] : detail::bundled_table())
        if (name == path_or_name) return parse_scenario(text, name);
    throw ModelError("no scenario file or bundled scenario named '" + path_or_name + "'");
}

std::vector<std::string> bundled_scenarios() {
    std::vector<std::string> out;
    for (const auto& [name, text] : detail::bundled_table()) out.push_back(name);
    return out;
}

std::string bundled_scenario_text(const std::string& name) {
    for (const auto& [n, text] : detail::bundled_table())
        if (n == name) return text;
    throw ModelError("unknown bundled scenario '" + name + "'");
}

std::string serialize_controller(const ControllerParams& p) {
    std::ostringstream os;
    os << "[ibrs]\n# ibr s_rated m_omega m_v v_min v_max\n";
    for (std::size_t i = 0; i < p.ibrs.size(); ++i) {
        const auto& b = p.ibrs[i];
        os << i + 1 << ' ' << fmt(b.s_rated) << ' ' << fmt(b.m_omega) << ' ' << fmt(b.m_v) << ' ' << fmt(b.v_min)
           << ' ' << fmt(b.v_max) << '\n';
    }
    const auto& g = p.gains;
    os << "\n[controller]\n";
    os << "tau_omega = " << fmt(g.tau_omega) << '\n';
    os << "tau_v = " << fmt(g.tau_v) << '\n';
    os << "tau_p = " << fmt(g.tau_p) << '\n';
    os << "tau_d = " << fmt(g.tau_d) << '\n';
    os << "beta = " << fmt(g.beta) << '\n';
    os << "k = " << fmt(g.k) << '\n';
    return os.str();
}

std::string serialize_scenario(const ScenarioFile& f) {
    const auto& s = f.scenario;
    const auto& n = s.network;
    std::ostringstream os;
    auto vec = [](const Vec& v) {
        std::string out;
        for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v(i));
        return out;
    };
    os << "[scenario]\nname = " << s.name << "\n\n";
    os << "[bases]\ns_base = " << fmt(n.bases.s_base_va) << "\nv_base = " << fmt(n.bases.v_base_v)
       << "\nf_nom = " << fmt(n.bases.f_nom_hz) << "\nphases = " << n.bases.phases << "\n\n";
    os << "[buses]\n";
    for (const auto& b : n.buses) os << b.id << ' ' << to_string(b.kind) << '\n';
    auto zunit = [](ImpedanceUnit u) { return u == ImpedanceUnit::Ohm ? "ohm" : "pu"; };
    os << "\n[lines] unit=" << zunit(n.line_unit) << '\n';
    for (const auto& l : n.lines) os << l.from << ' ' << l.to << ' ' << fmt(l.r) << ' ' << fmt(l.x) << '\n';
    os << "\n[connectors] unit=" << zunit(n.connector_unit) << '\n';
    for (const auto& c : n.connectors) os << c.ibr << ' ' << c.bus << ' ' << fmt(c.r) << ' ' << fmt(c.x) << '\n';
    os << "\n[loads] unit=" << (n.load_unit == PowerUnit::VoltAmpere ? "va" : "pu") << '\n';
    for (const auto& l : n.loads) os << l.bus << ' ' << fmt(l.s) << ' ' << fmt(l.pf) << '\n';
    os << '\n' << serialize_controller(s.params);
    os << "\n[graph]\n";
    for (const auto& e : s.graph.edges()) os << e.from + 1 << ' ' << e.to + 1 << ' ' << fmt(e.weight) << '\n';
    os << "\n[initial]\nmode = " << to_string(s.initial.mode) << '\n';
    if (s.initial.theta.size()) os << "theta = " << vec(s.initial.theta) << '\n';
    if (s.initial.omega.size()) os << "omega = " << vec(s.initial.omega) << '\n';
    if (s.initial.v.size()) os << "v = " << vec(s.initial.v) << '\n';
    if (s.initial.lambda.size()) os << "lambda = " << vec(s.initial.lambda) << '\n';
    if (s.initial.zeta.size()) os << "zeta = " << vec(s.initial.zeta) << '\n';
    os << "\n[events]\n";
    for (const auto& e : s.events) {
        os << fmt(e.time) << ' ' << to_string(e.kind);
        if (e.kind == EventKind::ScaleLoad) os << ' ' << e.bus << ' ' << fmt(e.factor);
        if (e.kind == EventKind::SetLimits)
            os << ' ' << (e.ibr == 0 ? std::string("all") : std::to_string(e.ibr)) << ' ' << fmt(e.v_min) << ' '
               << fmt(e.v_max);
        os << '\n';
    }
    const auto& st = s.settings;
    os << "\n[simulation]\nt_end = " << fmt(st.t_end) << "\nrel_tol = " << fmt(st.rel_tol)
       << "\nabs_tol = " << fmt(st.abs_tol) << "\nmax_step = " << fmt(st.max_step)
       << "\nsample_period = " << fmt(st.sample_s) << '\n';
    os << "\n[outputs]\ndir = " << f.outputs.directory << "\nchannels = ";
    if (f.outputs.channels.empty()) {
        os << "all";
    } else {
        for (std::size_t i = 0; i < f.outputs.channels.size(); ++i) os << (i ? "," : "") << f.outputs.channels[i];
    }
    os << '\n';
    if (f.tuning) {
        const auto& t = *f.tuning;
        os << "\n[tuning]\ndelta_f_max = " << fmt(t.delta_f_max_pu) << "\nrocof = " << fmt(t.rocof_star)
           << "\ntau_p = " << fmt(t.tau_p) << "\nk_d = " << fmt(t.k_d) << "\nbeta_budget = "
           << fmt(t.beta_error_budget) << "\ntau_d_floor = " << fmt(t.tau_d_floor) << "\nbeta_cap = "
           << fmt(t.beta_cap) << '\n';
    }
    return os.str();
}

}  // namespace qshare
