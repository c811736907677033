#include "gflsim/config.hpp"

#include "gflsim/errors.hpp"
#include "gflsim/version.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gflsim {

namespace {

struct RawValue {
    enum class Kind { number, boolean, text };
    Kind kind = Kind::number;
    double num = 0.0;
    bool flag = false;
    std::string text;
    int line = 0;
};

using KeyValues = std::map<std::string, RawValue>;

struct RawDoc {
    std::map<std::string, KeyValues> sections;
    std::vector<KeyValues> events;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string_view strip_comment(std::string_view s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') {
            in_string = !in_string;
        } else if (s[i] == '#' && !in_string) {
            return s.substr(0, i);
        }
    }
    return s;
}

bool valid_name(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_';
    });
}

RawValue parse_value(std::string_view token, int line) {
    RawValue v;
    v.line = line;
    if (token.size() >= 2 && token.front() == '"') {
        if (token.back() != '"' || token.size() < 2) {
            throw ParseError(line, "unterminated string value");
        }
        v.kind = RawValue::Kind::text;
        v.text = std::string(token.substr(1, token.size() - 2));
        return v;
    }
    if (token == "true" || token == "false") {
        v.kind = RawValue::Kind::boolean;
        v.flag = token == "true";
        return v;
    }
    std::string_view num = token;
    if (!num.empty() && num.front() == '+') {
        num.remove_prefix(1);
    }
    double parsed = 0.0;
    const auto res = std::from_chars(num.data(), num.data() + num.size(), parsed);
    if (res.ec != std::errc{} || res.ptr != num.data() + num.size()) {
        throw ParseError(line, "cannot parse value '" + std::string(token) + "'");
    }
    if (!std::isfinite(parsed)) {
        throw ParseError(line, "non-finite number '" + std::string(token) + "'");
    }
    v.kind = RawValue::Kind::number;
    v.num = parsed;
    return v;
}

RawDoc parse_raw(std::string_view text) {
    RawDoc doc;
    KeyValues* current = nullptr;
    std::string current_name;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                              : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;

        line = trim(strip_comment(line));
        if (line.empty()) {
            continue;
        }

        if (line.starts_with("[[")) {
            if (!line.ends_with("]]")) {
                throw ParseError(line_no, "malformed table header");
            }
            const std::string_view name = trim(line.substr(2, line.size() - 4));
            if (name != "events") {
                throw ParseError(line_no, "only [[events]] tables are supported");
            }
            doc.events.emplace_back();
            current = &doc.events.back();
            current_name = "events";
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(line_no, "malformed section header");
            }
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (!valid_name(name)) {
                throw ParseError(line_no, "malformed section name '" + name + "'");
            }
            if (doc.sections.count(name)) {
                throw ParseError(line_no, "duplicate section [" + name + "]");
            }
            current = &doc.sections[name];
            current_name = name;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(line_no, "expected 'key = value'");
        }
        if (!current) {
            throw ParseError(line_no, "key outside a section");
        }
        const std::string key(trim(line.substr(0, eq)));
        if (!valid_name(key)) {
            throw ParseError(line_no, "malformed key '" + key + "'");
        }
        if (current->count(key)) {
            throw ParseError(line_no, "duplicate key '" + key + "' in [" + current_name + "]");
        }
        (*current)[key] = parse_value(trim(line.substr(eq + 1)), line_no);
    }
    return doc;
}

/// Pulls typed values out of one section, tracking consumption so leftovers
/// can be reported as unknown keys.
class SectionReader {
public:
    SectionReader(std::string name, KeyValues* kv) : name_(std::move(name)), kv_(kv) {}

    double number(const char* key, double def) {
        const RawValue* v = take(key);
        if (!v) {
            return def;
        }
        require_kind(*v, key, RawValue::Kind::number, "a number");
        return v->num;
    }

    double require_number(const char* key) {
        const RawValue* v = take(key);
        if (!v) {
            throw ValidationError(path(key) + ": missing required key");
        }
        require_kind(*v, key, RawValue::Kind::number, "a number");
        return v->num;
    }

    bool boolean(const char* key, bool def) {
        const RawValue* v = take(key);
        if (!v) {
            return def;
        }
        require_kind(*v, key, RawValue::Kind::boolean, "true or false");
        return v->flag;
    }

    std::string text(const char* key, const char* def) {
        const RawValue* v = take(key);
        if (!v) {
            return def;
        }
        require_kind(*v, key, RawValue::Kind::text, "a quoted string");
        return v->text;
    }

    std::string require_text(const char* key) {
        const RawValue* v = take(key);
        if (!v) {
            throw ValidationError(path(key) + ": missing required key");
        }
        require_kind(*v, key, RawValue::Kind::text, "a quoted string");
        return v->text;
    }

    bool has(const char* key) const { return kv_ && kv_->count(key); }

    void done() const {
        if (!kv_) {
            return;
        }
        for (const auto& [key, value] : *kv_) {
            if (!consumed_.count(key)) {
                throw UnknownKeyError(path(key.c_str()) + ": unknown key");
            }
        }
    }

private:
    std::string path(const char* key) const { return name_ + "." + key; }

    const RawValue* take(const char* key) {
        if (!kv_) {
            return nullptr;
        }
        const auto it = kv_->find(key);
        if (it == kv_->end()) {
            return nullptr;
        }
        consumed_.insert(key);
        return &it->second;
    }

    void require_kind(const RawValue& v, const char* key, RawValue::Kind kind,
                      const char* what) const {
        if (v.kind != kind) {
            throw ValidationError(path(key) + ": expected " + what);
        }
    }

    std::string name_;
    KeyValues* kv_;
    std::set<std::string, std::less<>> consumed_;
};

KeyValues* section(RawDoc& doc, const char* name) {
    const auto it = doc.sections.find(name);
    return it == doc.sections.end() ? nullptr : &it->second;
}

EventKind event_kind(const std::string& type, const std::string& where) {
    if (type == "phase_jump") return EventKind::phase_jump;
    if (type == "p_step") return EventKind::p_step;
    if (type == "q_step") return EventKind::q_step;
    if (type == "support_toggle") return EventKind::support_toggle;
    throw ValidationError(where + ": unknown event type \"" + type +
                          "\" (phase_jump, p_step, q_step, support_toggle)");
}

void fmt_number(std::string& out, double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round trip
    out.append(buf, res.ptr);
}

void kv_line(std::string& out, const char* key, double v) {
    out += key;
    out += " = ";
    fmt_number(out, v);
    out += '\n';
}

void kv_line(std::string& out, const char* key, bool v) {
    out += key;
    out += " = ";
    out += v ? "true" : "false";
    out += '\n';
}

void kv_line(std::string& out, const char* key, const std::string& v) {
    out += key;
    out += " = \"";
    out += v;
    out += "\"\n";
}

}  // namespace

ParsedConfig parse_config(std::string_view text, const std::vector<ConfigOverride>& overrides) {
    RawDoc doc = parse_raw(text);

    for (const auto& [key, value] : overrides) {
        const std::size_t dot = key.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
            throw ValidationError("override '" + key + "': expected section.key");
        }
        const std::string sec = key.substr(0, dot);
        if (sec == "events") {
            throw ValidationError("override '" + key + "': events cannot be overridden");
        }
        doc.sections[sec][key.substr(dot + 1)] = parse_value(trim(value), 0);
    }

    static const std::set<std::string> known_sections = {
        "grid",          "filter",           "network",  "pll",        "power_control",
        "current_control", "frequency_support", "volt_var", "simulation"};
    for (const auto& [name, kv] : doc.sections) {
        if (!known_sections.count(name)) {
            throw UnknownKeyError("unknown section [" + name + "]");
        }
    }

    ParsedConfig out;
    Scenario& sc = out.scenario;
    SimConfig& cfg = out.config;

    SectionReader grid("grid", section(doc, "grid"));
    sc.grid.vm = grid.require_number("vm");
    sc.grid.f_hz = grid.require_number("f");
    sc.grid.theta_dist = grid.number("theta_dist", 0.0);
    sc.grid.t_dist = grid.number("t_dist", 0.0);
    sc.grid.delta_f_pu = grid.number("delta_f_pu", 0.0);
    grid.done();
    const double omega = sc.grid.omega();

    SectionReader filter("filter", section(doc, "filter"));
    const double rf = filter.number("rf", 0.01);
    const double xf = filter.number("xf", 0.10);
    filter.done();

    SectionReader network("network", section(doc, "network"));
    const double rg = network.number("rg", 0.01);
    const double xg = network.number("xg", 0.05);
    network.done();

    sc.network = NetworkParams::balanced(rf, rg, xf / omega, xg / omega);
    sc.network.xf_pu = xf;
    sc.network.xg_pu = xg;

    SectionReader pll("pll", section(doc, "pll"));
    sc.pll.kp = pll.number("kp", 0.5);
    sc.pll.ki = pll.number("ki", 10.0);
    sc.pll.tf = pll.number("tf", 1e-3);
    pll.done();

    SectionReader power("power_control", section(doc, "power_control"));
    sc.power.kp = power.number("kp", 0.1);
    sc.power.ki = power.number("ki", 10.0);
    sc.power.tf = power.number("tf", 5e-3);
    sc.p_ref = power.number("p_ref", 0.0);
    sc.q_ref = power.number("q_ref", 0.0);
    power.done();

    SectionReader current("current_control", section(doc, "current_control"));
    sc.current.kp = current.number("kp", 0.3);
    sc.current.ki = current.number("ki", 20.0);
    sc.current.tf = current.number("tf", 5e-4);
    current.done();

    SectionReader fs("frequency_support", section(doc, "frequency_support"));
    sc.freq_support.enabled = fs.boolean("enabled", false);
    sc.freq_support.kf = fs.number("kf", 20.0);
    sc.freq_support.fdb = fs.number("fdb", 6e-4);
    fs.done();

    SectionReader vv("volt_var", section(doc, "volt_var"));
    sc.volt_var.enabled = vv.boolean("enabled", false);
    sc.volt_var.kv = vv.number("kv", 10.0);
    sc.volt_var.vdb = vv.number("vdb", 0.01);
    sc.volt_var.vtarget = vv.number("vtarget", 1.0);
    sc.volt_var.qmax = vv.number("qmax", 0.3);
    vv.done();

    SectionReader sim("simulation", section(doc, "simulation"));
    cfg.dt = sim.require_number("dt");
    cfg.t_end = sim.require_number("t_end");
    const std::string topology = sim.text("topology", "rl");
    if (topology == "rl") {
        cfg.topology = Topology::rl;
    } else if (topology == "resistive") {
        cfg.topology = Topology::resistive;
    } else {
        throw ValidationError("simulation.topology: must be \"rl\" or \"resistive\"");
    }
    const std::string form = sim.text("companion_form", "norton");
    if (form == "norton") {
        cfg.companion_form = CompanionForm::norton;
    } else if (form == "thevenin") {
        cfg.companion_form = CompanionForm::thevenin;
    } else {
        throw ValidationError("simulation.companion_form: must be \"norton\" or \"thevenin\"");
    }
    const std::string frame = sim.text("frame", "abc");
    if (frame == "abc") {
        cfg.frame = FramePath::abc;
    } else if (frame == "dq") {
        cfg.frame = FramePath::dq;
    } else {
        throw ValidationError("simulation.frame: must be \"abc\" or \"dq\"");
    }
    cfg.epsilon.epsilon = sim.number("epsilon", 1e-5);
    cfg.solver.tol = sim.number("newton_tol", 1e-10);
    cfg.solver.max_iter = static_cast<int>(sim.number("newton_max_iter", 50));
    cfg.solver.damping = sim.number("newton_damping", 1.0);
    cfg.init_residual_max = sim.number("init_residual_max", 10.0);
    sim.done();

    sc.events.reserve(doc.events.size());
    for (std::size_t k = 0; k < doc.events.size(); ++k) {
        const std::string where = "events[" + std::to_string(k) + "]";
        SectionReader ev(where, &doc.events[k]);
        Event e;
        e.t = ev.require_number("t");
        e.kind = event_kind(ev.require_text("type"), where + ".type");
        if (e.kind == EventKind::support_toggle) {
            e.value = ev.number("value", 0.0);
        } else {
            if (!ev.has("value")) {
                throw ValidationError(where + ".value: required for this event type");
            }
            e.value = ev.require_number("value");
        }
        ev.done();
        sc.events.push_back(e);
    }

    validate_scenario(sc, cfg);
    return out;
}

ParsedConfig load_config_file(const std::filesystem::path& path,
                              const std::vector<ConfigOverride>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

std::string serialize_config(const Scenario& sc, const SimConfig& cfg) {
    const double omega = sc.grid.omega();
    std::string out;
    out.reserve(1024);

    out += "[grid]\n";
    kv_line(out, "vm", sc.grid.vm);
    kv_line(out, "f", sc.grid.f_hz);
    kv_line(out, "theta_dist", sc.grid.theta_dist);
    kv_line(out, "t_dist", sc.grid.t_dist);
    kv_line(out, "delta_f_pu", sc.grid.delta_f_pu);

    out += "\n[filter]\n";
    kv_line(out, "rf", sc.network.rf_dq());
    kv_line(out, "xf", sc.network.xf_pu >= 0.0 ? sc.network.xf_pu : sc.network.lf * omega);

    out += "\n[network]\n";
    kv_line(out, "rg", sc.network.rg_dq());
    kv_line(out, "xg", sc.network.xg_pu >= 0.0 ? sc.network.xg_pu : sc.network.lg * omega);

    out += "\n[pll]\n";
    kv_line(out, "kp", sc.pll.kp);
    kv_line(out, "ki", sc.pll.ki);
    kv_line(out, "tf", sc.pll.tf);

    out += "\n[power_control]\n";
    kv_line(out, "kp", sc.power.kp);
    kv_line(out, "ki", sc.power.ki);
    kv_line(out, "tf", sc.power.tf);
    kv_line(out, "p_ref", sc.p_ref);
    kv_line(out, "q_ref", sc.q_ref);

    out += "\n[current_control]\n";
    kv_line(out, "kp", sc.current.kp);
    kv_line(out, "ki", sc.current.ki);
    kv_line(out, "tf", sc.current.tf);

    out += "\n[frequency_support]\n";
    kv_line(out, "enabled", sc.freq_support.enabled);
    kv_line(out, "kf", sc.freq_support.kf);
    kv_line(out, "fdb", sc.freq_support.fdb);

    out += "\n[volt_var]\n";
    kv_line(out, "enabled", sc.volt_var.enabled);
    kv_line(out, "kv", sc.volt_var.kv);
    kv_line(out, "vdb", sc.volt_var.vdb);
    kv_line(out, "vtarget", sc.volt_var.vtarget);
    kv_line(out, "qmax", sc.volt_var.qmax);

    out += "\n[simulation]\n";
    kv_line(out, "dt", cfg.dt);
    kv_line(out, "t_end", cfg.t_end);
    kv_line(out, "topology",
            std::string(cfg.topology == Topology::rl ? "rl" : "resistive"));
    kv_line(out, "companion_form",
            std::string(cfg.companion_form == CompanionForm::norton ? "norton" : "thevenin"));
    kv_line(out, "frame", std::string(cfg.frame == FramePath::abc ? "abc" : "dq"));
    kv_line(out, "epsilon", cfg.epsilon.epsilon);
    kv_line(out, "newton_tol", cfg.solver.tol);
    kv_line(out, "newton_max_iter", static_cast<double>(cfg.solver.max_iter));
    kv_line(out, "newton_damping", cfg.solver.damping);
    kv_line(out, "init_residual_max", cfg.init_residual_max);

    for (const Event& e : sc.events) {
        out += "\n[[events]]\n";
        kv_line(out, "t", e.t);
        switch (e.kind) {
            case EventKind::phase_jump:
                kv_line(out, "type", std::string("phase_jump"));
                break;
            case EventKind::p_step:
                kv_line(out, "type", std::string("p_step"));
                break;
            case EventKind::q_step:
                kv_line(out, "type", std::string("q_step"));
                break;
            case EventKind::support_toggle:
                kv_line(out, "type", std::string("support_toggle"));
                break;
        }
        kv_line(out, "value", e.value);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (const char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string RunManifest::to_text() const {
    std::ostringstream out;
    out << "tool_version = \"" << tool_version << "\"\n";
    out << "input = \"" << input_name << "\"\n";
    out << "input_fnv1a64 = \"0x" << std::hex << input_hash << std::dec << "\"\n\n";
    out << resolved_config;
    return out.str();
}

RunManifest make_manifest(const Scenario& scenario, const SimConfig& config,
                          std::string_view input_bytes, std::string_view input_name) {
    RunManifest m;
    m.tool_version = std::string(kVersion);
    m.input_name = std::string(input_name);
    m.input_hash = fnv1a64(input_bytes);
    m.resolved_config = serialize_config(scenario, config);
    return m;
}

}  // namespace gflsim
