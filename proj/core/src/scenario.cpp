#include "freqctl/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace freqctl {

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

struct Entry {
    int line = 0;
    std::string key;
    std::string value;
};

// Section name -> entries in file order.
using RawConfig = std::map<std::string, std::vector<Entry>>;

const std::set<std::string> kKnownSections{"buses",  "phys_lines", "comm_lines", "areas",    "controller",
                                           "delays", "disturbance", "sim",       "events",   "criteria",
                                           "outputs"};
const std::set<std::string> kRowSections{"buses", "phys_lines", "comm_lines", "areas"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s, int line, const std::string& what) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty()) throw ConfigError(line, "expected a number for " + what + ", got '" + s + "'");
    return v;
}

long long to_int(const std::string& s, int line, const std::string& what) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError(line, "expected an integer for " + what + ", got '" + s + "'");
    return v;
}

std::uint64_t to_seed(const std::string& s, int line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError(line, "expected a nonnegative integer seed, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& s, int line, const std::string& what) {
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError(line, "expected true or false for " + what + ", got '" + s + "'");
}

RawConfig read_raw(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!kKnownSections.count(section)) throw ConfigError(lineno, "unknown section [" + section + "]");
            if (raw.count(section)) throw ConfigError(lineno, "section [" + section + "] appears twice");
            raw[section];
            continue;
        }
        if (section.empty()) throw ConfigError(lineno, "entry outside any section");
        Entry e;
        e.line = lineno;
        if (kRowSections.count(section)) {
            const auto toks = split_ws(line);
            const std::size_t head = section == "buses" || section == "areas" ? 1 : 2;
            if (toks.size() < head) throw ConfigError(lineno, "incomplete row");
            for (std::size_t i = 0; i < toks.size(); ++i) {
                auto& dst = i < head ? e.key : e.value;
                if (!dst.empty()) dst += ' ';
                dst += toks[i];
            }
        } else {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(lineno, "expected key = value");
            e.key = trim(line.substr(0, eq));
            e.value = trim(line.substr(eq + 1));
            if (e.key.empty()) throw ConfigError(lineno, "empty key");
        }
        raw[section].push_back(std::move(e));
    }
    return raw;
}

// Row values are `word key=value ...`; returns the named fields.
std::map<std::string, std::string> row_fields(const Entry& e, std::vector<std::string>* words) {
    std::map<std::string, std::string> out;
    for (const auto& tok : split_ws(e.value)) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            if (!words) throw ConfigError(e.line, "expected name=value, got '" + tok + "'");
            words->push_back(tok);
            continue;
        }
        const auto k = tok.substr(0, eq);
        if (!out.emplace(k, tok.substr(eq + 1)).second) throw ConfigError(e.line, "field '" + k + "' repeated");
    }
    return out;
}

void set_row_field(Entry& e, const std::string& field, const std::string& value) {
    auto toks = split_ws(e.value);
    bool found = false;
    for (auto& tok : toks) {
        if (tok.rfind(field + "=", 0) == 0) {
            tok = field + "=" + value;
            found = true;
        }
    }
    if (!found) toks.push_back(field + "=" + value);
    e.value.clear();
    for (const auto& tok : toks) e.value += (e.value.empty() ? "" : " ") + tok;
}

int bus_index(const std::string& id, int n, int line) {
    const auto v = to_int(id, line, "bus id");
    if (v < 1 || v > n) throw ConfigError(line, "bus " + id + " is not defined");
    return static_cast<int>(v - 1);
}

std::string edge_key(const std::string& s) {
    // "1-2", "1 2" -> "1 2"
    std::string out = s;
    std::replace(out.begin(), out.end(), '-', ' ');
    return trim(out);
}

void apply_raw_override(RawConfig& raw, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError(0, "override '" + assignment + "' is not key=value");
    const auto path = trim(assignment.substr(0, eq));
    const auto value = trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos) throw ConfigError(0, "override key '" + path + "' has no section");
    const auto section = path.substr(0, dot);
    const auto rest = path.substr(dot + 1);
    if (!kKnownSections.count(section)) throw ConfigError(0, "unknown section in override '" + path + "'");
    auto& entries = raw[section];
    if (kRowSections.count(section)) {
        const auto dot2 = rest.rfind('.');
        if (dot2 == std::string::npos) throw ConfigError(0, "override '" + path + "' needs <row>.<field>");
        const auto row = section == "buses" || section == "areas" ? rest.substr(0, dot2) : edge_key(rest.substr(0, dot2));
        const auto field = rest.substr(dot2 + 1);
        for (auto& e : entries) {
            if (e.key == row) {
                set_row_field(e, field, value);
                return;
            }
        }
        throw ConfigError(0, "override '" + path + "' names a row that does not exist");
    }
    // Switching delay modes replaces the previous specification.
    if (section == "delays" && (rest == "uniform" || rest == "interval")) {
        std::erase_if(entries, [&](const Entry& e) { return e.key != "seed" && e.key != rest; });
    }
    const auto key = section == "delays" && rest.find('-') != std::string::npos ? edge_key(rest) : rest;
    for (auto& e : entries) {
        if (e.key == key) {
            e.value = value;
            return;
        }
    }
    entries.push_back({0, key, value});
}

void parse_buses(const std::vector<Entry>& entries, Scenario& s) {
    for (const auto& e : entries) {
        BusParams b;
        b.id = static_cast<int>(to_int(e.key, e.line, "bus id"));
        std::vector<std::string> words;
        auto f = row_fields(e, &words);
        if (words.size() != 1 || (words[0] != "gen" && words[0] != "load"))
            throw ConfigError(e.line, "bus row needs exactly one kind word: gen or load");
        b.kind = words[0] == "gen" ? BusKind::generator : BusKind::load;
        auto take = [&](const char* key, bool required, double fallback) {
            auto it = f.find(key);
            if (it == f.end()) {
                if (required) throw ConfigError(e.line, std::string("bus ") + e.key + " is missing " + key);
                return fallback;
            }
            const double v = to_double(it->second, e.line, key);
            f.erase(it);
            return v;
        };
        b.Lambda = take("Lambda", true, 0.0);
        b.pL = take("pL", false, 0.0);
        if (b.is_generator()) {
            b.M = take("M", true, 0.0);
            b.tau = take("tau", true, 0.0);
            b.cost_q = take("q", true, 0.0);
            b.cost_c = take("c", false, 0.0);
            b.k_g = take("kg", false, 1.0);
            b.k_c = take("kc", false, 1.0);
            if (f.count("pmin")) b.pM_min = take("pmin", true, 0.0);
            if (f.count("pmax")) b.pM_max = take("pmax", true, 0.0);
        }
        if (!f.empty())
            throw ConfigError(e.line, "unknown field '" + f.begin()->first + "' for " + words[0] + " bus " + e.key);
        s.model.buses.push_back(b);
    }
}

std::vector<LineParams> parse_lines(const std::vector<Entry>& entries, int n, bool comm) {
    std::vector<LineParams> out;
    for (const auto& e : entries) {
        const auto ends = split_ws(e.key);
        LineParams l;
        l.from = bus_index(ends[0], n, e.line);
        l.to = bus_index(ends[1], n, e.line);
        if (l.from == l.to) throw ConfigError(e.line, "self loop on bus " + ends[0]);
        l = canonical(l);
        auto f = row_fields(e, nullptr);
        const char* weight = comm ? "alpha" : "Y";
        auto it = f.find(weight);
        if (it != f.end()) {
            (comm ? l.alpha : l.Y) = to_double(it->second, e.line, weight);
            f.erase(it);
        } else if (!comm) {
            throw ConfigError(e.line, "physical line is missing Y");
        }
        if (!f.empty()) throw ConfigError(e.line, "unknown field '" + f.begin()->first + "' on line " + e.key);
        out.push_back(l);
    }
    return out;
}

void parse_areas(const std::vector<Entry>& entries, Scenario& s) {
    const int n = s.model.n_buses();
    for (const auto& e : entries) {
        const auto k = to_int(e.key, e.line, "area id");
        if (k != static_cast<long long>(s.model.areas.size()) + 1)
            throw ConfigError(e.line, "areas must be numbered 1..K in order");
        auto f = row_fields(e, nullptr);
        Area a;
        for (const char* need : {"buses", "informed"})
            if (!f.count(need)) throw ConfigError(e.line, std::string("area is missing ") + need);
        for (const auto& id : split_on(f["buses"], ',')) a.buses.push_back(bus_index(id, n, e.line));
        a.informed_bus = bus_index(f["informed"], n, e.line);
        if (f.count("schedule")) a.schedule = to_double(f["schedule"], e.line, "schedule");
        for (const auto& [key, _] : f)
            if (key != "buses" && key != "informed" && key != "schedule")
                throw ConfigError(e.line, "unknown area field '" + key + "'");
        s.model.areas.push_back(a);
    }
}

template <typename Fn>
void for_keys(const RawConfig& raw, const std::string& section, Fn&& fn) {
    auto it = raw.find(section);
    if (it == raw.end()) return;
    std::set<std::string> seen;
    for (const auto& e : it->second) {
        if (!seen.insert(e.key).second) throw ConfigError(e.line, "key '" + e.key + "' repeated");
        if (!fn(e)) throw ConfigError(e.line, "unknown key '" + e.key + "' in [" + section + "]");
    }
}

Scenario build(const RawConfig& raw) {
    Scenario s;
    if (!raw.count("buses") || raw.at("buses").empty()) throw ConfigError(0, "missing [buses]");
    parse_buses(raw.at("buses"), s);
    const int n = s.model.n_buses();
    for (int i = 0; i < n; ++i)
        if (s.model.buses[i].id != i + 1)
            throw ConfigError(raw.at("buses")[i].line, "bus ids must be listed as 1..N in order");
    if (!raw.count("phys_lines")) throw ConfigError(0, "missing [phys_lines]");
    if (!raw.count("comm_lines")) throw ConfigError(0, "missing [comm_lines]");
    s.model.phys_edges = parse_lines(raw.at("phys_lines"), n, false);
    s.model.comm_edges = parse_lines(raw.at("comm_lines"), n, true);
    if (raw.count("areas")) parse_areas(raw.at("areas"), s);

    for_keys(raw, "controller", [&](const Entry& e) {
        if (e.key == "kind") {
            try {
                s.controller.kind = controller_kind_from_string(e.value);
            } catch (const std::exception& ex) {
                throw ConfigError(e.line, ex.what());
            }
        } else if (e.key == "bounds") {
            s.controller.bounds = to_bool(e.value, e.line, e.key);
        } else if (e.key == "observer") {
            s.controller.observer = to_bool(e.value, e.line, e.key);
        } else if (e.key == "tau_chi") {
            s.controller.tau_chi = to_double(e.value, e.line, e.key);
        } else {
            return false;
        }
        return true;
    });

    bool have_uniform = false, have_interval = false, have_edges = false;
    for_keys(raw, "delays", [&](const Entry& e) {
        if (e.key == "uniform") {
            s.delays.uniform = to_double(e.value, e.line, e.key);
            have_uniform = true;
        } else if (e.key == "interval") {
            const auto v = split_ws(e.value);
            if (v.size() != 2) throw ConfigError(e.line, "interval needs two numbers: lo hi");
            s.delays.lo = to_double(v[0], e.line, "interval lo");
            s.delays.hi = to_double(v[1], e.line, "interval hi");
            if (s.delays.lo < 0.0 || s.delays.hi < s.delays.lo)
                throw ConfigError(e.line, "interval must satisfy 0 <= lo <= hi");
            have_interval = true;
        } else if (e.key == "seed") {
            s.delays.seed = to_seed(e.value, e.line);
        } else {
            const auto ends = split_ws(edge_key(e.key));
            if (ends.size() != 2) return false;
            LineParams l{bus_index(ends[0], n, e.line), bus_index(ends[1], n, e.line)};
            const bool flipped = l.from > l.to;
            l = canonical(l);
            int idx = -1;
            for (std::size_t c = 0; c < s.model.comm_edges.size(); ++c)
                if (s.model.comm_edges[c].from == l.from && s.model.comm_edges[c].to == l.to) idx = static_cast<int>(c);
            if (idx < 0) throw ConfigError(e.line, "delay given for a missing communication line " + e.key);
            const auto v = split_ws(e.value);
            if (v.empty() || v.size() > 2) throw ConfigError(e.line, "edge delay takes one or two values");
            double fwd = to_double(v[0], e.line, "delay");
            double bwd = v.size() == 2 ? to_double(v[1], e.line, "delay") : fwd;
            if (flipped) std::swap(fwd, bwd);
            if (fwd < 0.0 || bwd < 0.0) throw ConfigError(e.line, "delays must be nonnegative");
            s.delays.per_edge[idx] = {fwd, bwd};
            have_edges = true;
        }
        return true;
    });
    if (have_uniform + have_interval + have_edges > 1)
        throw ConfigError(0, "[delays] mixes uniform, interval and per-edge forms");
    if (s.delays.uniform < 0.0) throw ConfigError(0, "uniform delay must be nonnegative");
    if (have_interval) {
        s.delays.mode = DelayMode::interval;
        if (!s.delays.seed) throw ConfigError(0, "interval delays need a seed");
    } else if (have_edges) {
        s.delays.mode = DelayMode::explicit_edges;
        if (s.delays.per_edge.size() != s.model.comm_edges.size())
            throw ConfigError(0, "per-edge delays must cover every communication line");
    }

    for_keys(raw, "disturbance", [&](const Entry& e) {
        if (e.key == "kind") {
            if (e.value == "none") s.disturbance.kind = DisturbanceKind::none;
            else if (e.value == "decaying") s.disturbance.kind = DisturbanceKind::decaying;
            else if (e.value == "gaussian") s.disturbance.kind = DisturbanceKind::gaussian;
            else throw ConfigError(e.line, "disturbance kind must be none, decaying or gaussian");
        } else if (e.key == "power") {
            s.disturbance.power = to_double(e.value, e.line, e.key);
            if (s.disturbance.power < 0.0) throw ConfigError(e.line, "noise power must be nonnegative");
        } else if (e.key == "seed") {
            s.disturbance.seed = to_seed(e.value, e.line);
            s.disturbance_seeded = true;
        } else {
            return false;
        }
        return true;
    });
    if (s.disturbance.kind != DisturbanceKind::none && !s.disturbance_seeded)
        throw ConfigError(0, "a disturbance needs a seed");

    for_keys(raw, "sim", [&](const Entry& e) {
        if (e.key == "h") s.sim.h = to_double(e.value, e.line, e.key);
        else if (e.key == "t_end") s.sim.t_end = to_double(e.value, e.line, e.key);
        else if (e.key == "record_every") s.sim.record_every = static_cast<int>(to_int(e.value, e.line, e.key));
        else if (e.key == "divergence_threshold") s.sim.divergence_threshold = to_double(e.value, e.line, e.key);
        else if (e.key == "settle_threshold") s.sim.settle_threshold = to_double(e.value, e.line, e.key);
        else if (e.key == "method") {
            if (e.value == "rk4") s.sim.method = Method::rk4;
            else if (e.value == "euler") s.sim.method = Method::euler;
            else throw ConfigError(e.line, "method must be rk4 or euler");
        } else if (e.key == "frame_prehistory") {
            if (e.value == "zero") s.sim.frame_prehistory = FramePrehistory::zero;
            else if (e.value == "initial") s.sim.frame_prehistory = FramePrehistory::initial;
            else throw ConfigError(e.line, "frame_prehistory must be zero or initial");
        } else if (e.key == "interp") {
            if (e.value == "linear") s.sim.interp = Interpolation::linear;
            else if (e.value == "cubic") s.sim.interp = Interpolation::cubic;
            else throw ConfigError(e.line, "interp must be linear or cubic");
        } else {
            return false;
        }
        return true;
    });
    if (!(s.sim.h > 0.0)) throw ConfigError(0, "sim.h must be positive");
    if (!(s.sim.t_end > 0.0)) throw ConfigError(0, "sim.t_end must be positive");
    if (s.sim.record_every < 1) throw ConfigError(0, "sim.record_every must be at least 1");

    if (raw.count("events")) {
        for (const auto& e : raw.at("events")) {
            LoadEvent ev;
            ev.time = to_double(e.key, e.line, "event time");
            if (ev.time < 0.0) throw ConfigError(e.line, "event time must be nonnegative");
            if (e.value == "configured") {
                ev.apply_configured = true;
            } else {
                for (const auto& tok : split_ws(e.value)) {
                    const auto parts = split_on(tok, ':');
                    if (parts.size() != 2) throw ConfigError(e.line, "event entries are bus:value or 'configured'");
                    ev.set.emplace_back(bus_index(parts[0], n, e.line), to_double(parts[1], e.line, "demand"));
                }
                if (ev.set.empty()) throw ConfigError(e.line, "empty event");
            }
            if (!s.sim.events.empty() && ev.time < s.sim.events.back().time)
                throw ConfigError(e.line, "events must be listed in time order");
            s.sim.events.push_back(ev);
        }
    }

    for_keys(raw, "criteria", [&](const Entry& e) {
        if (e.key == "expect") {
            if (e.value == "restore") s.criteria.expect = Expectation::restore;
            else if (e.value == "fail") s.criteria.expect = Expectation::fail;
            else throw ConfigError(e.line, "expect must be restore or fail");
        } else if (e.key == "omega_inf_max") s.criteria.omega_inf_max = to_double(e.value, e.line, e.key);
        else if (e.key == "pM_error_max") s.criteria.pM_error_max = to_double(e.value, e.line, e.key);
        else if (e.key == "areaflow_error_max") s.criteria.areaflow_error_max = to_double(e.value, e.line, e.key);
        else if (e.key == "fail_omega_min") s.criteria.fail_omega_min = to_double(e.value, e.line, e.key);
        else if (e.key == "check_multipliers") s.criteria.check_multipliers = to_bool(e.value, e.line, e.key);
        else return false;
        return true;
    });

    for_keys(raw, "outputs", [&](const Entry& e) {
        if (e.key == "csv") s.outputs.csv = e.value;
        else if (e.key == "metrics") s.outputs.metrics = e.value;
        else if (e.key == "diagnostics") s.outputs.diagnostics = to_bool(e.value, e.line, e.key);
        else if (e.key == "name") s.name = e.value;
        else return false;
        return true;
    });

    const auto violations = validate(s.model);
    if (!violations.empty()) {
        std::string msg = "invalid network:";
        for (const auto& v : violations) msg += "\n  " + v.element + ": " + v.message + " (" + v.invariant + ")";
        throw ConfigError(0, msg);
    }
    if (s.controller.bounds && uses_tieline(s.controller.kind))
        throw ConfigError(0, "generation bounds are not supported together with the tie-line controller");
    if (uses_tieline(s.controller.kind) && s.model.areas.empty())
        throw ConfigError(0, "the tie-line controller needs an [areas] section");
    if (!(s.controller.tau_chi > 0.0)) throw ConfigError(0, "controller.tau_chi must be positive");
    return s;
}

std::string num(double v) { return format_number(v); }

}  // namespace

Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides) {
    RawConfig raw = read_raw(text);
    for (const auto& o : overrides) apply_raw_override(raw, o);
    return build(raw);
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    Scenario s = parse_scenario(buf.str(), overrides);
    if (s.name.empty()) {
        auto stem = path.substr(path.find_last_of('/') + 1);
        if (const auto dot = stem.rfind('.'); dot != std::string::npos) stem.erase(dot);
        s.name = stem;
    }
    return s;
}

std::string serialize(const Scenario& s) {
    std::ostringstream os;
    const auto& m = s.model;
    os << "[buses]\n";
    for (const auto& b : m.buses) {
        os << b.id << (b.is_generator() ? " gen" : " load");
        if (b.is_generator()) {
            os << " M=" << num(b.M) << " Lambda=" << num(b.Lambda) << " tau=" << num(b.tau) << " q=" << num(b.cost_q)
               << " c=" << num(b.cost_c) << " kg=" << num(b.k_g) << " kc=" << num(b.k_c);
            if (b.pM_min) os << " pmin=" << num(*b.pM_min);
            if (b.pM_max) os << " pmax=" << num(*b.pM_max);
        } else {
            os << " Lambda=" << num(b.Lambda);
        }
        os << " pL=" << num(b.pL) << "\n";
    }
    auto id = [&](int j) { return m.buses[j].id; };
    os << "\n[phys_lines]\n";
    for (const auto& l : m.phys_edges) os << id(l.from) << " " << id(l.to) << " Y=" << num(l.Y) << "\n";
    os << "\n[comm_lines]\n";
    for (const auto& l : m.comm_edges) os << id(l.from) << " " << id(l.to) << " alpha=" << num(l.alpha) << "\n";
    if (!m.areas.empty()) {
        os << "\n[areas]\n";
        for (std::size_t k = 0; k < m.areas.size(); ++k) {
            const auto& a = m.areas[k];
            os << k + 1 << " buses=";
            for (std::size_t i = 0; i < a.buses.size(); ++i) os << (i ? "," : "") << id(a.buses[i]);
            os << " informed=" << id(a.informed_bus) << " schedule=" << num(a.schedule) << "\n";
        }
    }
    os << "\n[controller]\nkind = " << to_string(s.controller.kind) << "\nbounds = "
       << (s.controller.bounds ? "true" : "false") << "\nobserver = " << (s.controller.observer ? "true" : "false")
       << "\ntau_chi = " << num(s.controller.tau_chi) << "\n";
    os << "\n[delays]\n";
    switch (s.delays.mode) {
        case DelayMode::uniform: os << "uniform = " << num(s.delays.uniform) << "\n"; break;
        case DelayMode::interval: os << "interval = " << num(s.delays.lo) << " " << num(s.delays.hi) << "\n"; break;
        case DelayMode::explicit_edges:
            for (const auto& [e, d] : s.delays.per_edge) {
                const auto& l = m.comm_edges[static_cast<std::size_t>(e)];
                os << id(l.from) << "-" << id(l.to) << " = " << num(d.first) << " " << num(d.second) << "\n";
            }
            break;
    }
    if (s.delays.seed) os << "seed = " << *s.delays.seed << "\n";
    os << "\n[disturbance]\nkind = ";
    switch (s.disturbance.kind) {
        case DisturbanceKind::none: os << "none"; break;
        case DisturbanceKind::decaying: os << "decaying"; break;
        case DisturbanceKind::gaussian: os << "gaussian"; break;
    }
    os << "\npower = " << num(s.disturbance.power) << "\n";
    if (s.disturbance_seeded) os << "seed = " << s.disturbance.seed << "\n";
    os << "\n[sim]\nh = " << num(s.sim.h) << "\nt_end = " << num(s.sim.t_end)
       << "\nmethod = " << (s.sim.method == Method::rk4 ? "rk4" : "euler") << "\nrecord_every = " << s.sim.record_every
       << "\ninterp = " << (s.sim.interp == Interpolation::linear ? "linear" : "cubic")
       << "\ndivergence_threshold = " << num(s.sim.divergence_threshold)
       << "\nsettle_threshold = " << num(s.sim.settle_threshold)
       << "\nframe_prehistory = " << (s.sim.frame_prehistory == FramePrehistory::zero ? "zero" : "initial") << "\n";
    if (!s.sim.events.empty()) {
        os << "\n[events]\n";
        for (const auto& ev : s.sim.events) {
            os << num(ev.time) << " =";
            if (ev.apply_configured) os << " configured";
            for (const auto& [bus, v] : ev.set) os << " " << id(bus) << ":" << num(v);
            os << "\n";
        }
    }
    const auto& c = s.criteria;
    os << "\n[criteria]\nexpect = " << (c.expect == Expectation::restore ? "restore" : "fail")
       << "\nomega_inf_max = " << num(c.omega_inf_max) << "\n";
    if (c.pM_error_max) os << "pM_error_max = " << num(*c.pM_error_max) << "\n";
    if (c.areaflow_error_max) os << "areaflow_error_max = " << num(*c.areaflow_error_max) << "\n";
    os << "fail_omega_min = " << num(c.fail_omega_min) << "\ncheck_multipliers = "
       << (c.check_multipliers ? "true" : "false") << "\n";
    os << "\n[outputs]\n";
    if (!s.name.empty()) os << "name = " << s.name << "\n";
    if (!s.outputs.csv.empty()) os << "csv = " << s.outputs.csv << "\n";
    if (!s.outputs.metrics.empty()) os << "metrics = " << s.outputs.metrics << "\n";
    os << "diagnostics = " << (s.outputs.diagnostics ? "true" : "false") << "\n";
    return os.str();
}

Scenario with_override(const Scenario& scenario, const std::string& assignment) {
    return parse_scenario(serialize(scenario), {assignment});
}

std::vector<double> resolve_delays(const Scenario& s) {
    switch (s.delays.mode) {
        case DelayMode::uniform: return uniform_delays(s.model, s.delays.uniform);
        case DelayMode::interval: return interval_delays(s.model, s.delays.lo, s.delays.hi, s.delays.seed.value_or(0));
        case DelayMode::explicit_edges: {
            std::vector<double> out(2 * s.model.comm_edges.size(), 0.0);
            for (const auto& [e, d] : s.delays.per_edge) {
                out[2 * static_cast<std::size_t>(e)] = d.first;
                out[2 * static_cast<std::size_t>(e) + 1] = d.second;
            }
            return out;
        }
    }
    return {};
}

Simulator make_simulator(const Scenario& s) {
    return Simulator(s.model, s.controller, s.sim, resolve_delays(s), s.disturbance);
}

}  // namespace freqctl
