#pragma once
// Run configuration, CSV and JSON artifacts, and the run manifest.

#include "safeset/core.hpp"
#include "safeset/driver.hpp"
#include "safeset/sim/simulator.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace safeset::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting and CSV

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

inline double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorKind::Io, "cannot parse " + what + " from '" + s + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorKind::Io, "cannot parse " + what + " from '" + s + "'");
    return v;
}

/// Quotes a field when it holds a comma, quote, or line break.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_field(fields[i]);
    }
    return line + "\r\n";
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error(ErrorKind::Io, "csv is missing column '" + name + "'");
    }
};

/// RFC 4180 parser. Accepts CRLF or LF line endings.
inline CsvTable parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, field_started = false;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_record();
            ++i;
        } else if (c == '\n') {
            end_record();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw Error(ErrorKind::Io, "csv ends inside a quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    CsvTable t;
    if (records.empty()) throw Error(ErrorKind::Io, "csv is empty");
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size())
            throw Error(ErrorKind::Io, "csv row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                                           " fields, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorKind::Io, "error reading '" + path + "'");
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + p.parent_path().string() + "'");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "error writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Content hash

/// Git blob hash: SHA-1 of "blob <size>\0" followed by the content, in hex.
inline std::string git_blob_hash(const std::string& content) {
    const std::string data = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha1(), nullptr) != 1)
        throw Error(ErrorKind::Numerical, "sha1 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration

struct GroundTruthSettings {
    std::int64_t n_per_point = 2000;
    std::uint64_t seed = 0;
};

struct OutputPaths {
    std::string ground_truth; // ground-truth CSV, written by ground-truth and read by evaluate
    std::string prefix;       // estimate artifacts <prefix>.{trace,mask,checkpoints}.csv and .manifest.json
};

struct RunConfig {
    std::string problem = "pendulum";
    std::vector<GridDim> grid;
    SafetyConfig safety;
    MethodSpec method;
    std::int64_t budget = 5000;
    std::uint64_t seed = 0;
    int checkpoint_every = 100;
    unsigned threads = 1;
    GroundTruthSettings truth;
    OutputPaths outputs;
    json simulator = json::object(); // overrides of the problem's simulator constants

    [[nodiscard]] ParamGrid build_grid() const { return ParamGrid(grid); }
};

inline std::vector<GridDim> default_grid(const std::string& problem) {
    if (problem == "pendulum") return {{"sigma_theta", 0.0, 0.2, 21}, {"sigma_omega", 0.0, 0.2, 21}};
    if (problem == "daa") return {{"x0", 1000.0, 3000.0, 21}, {"y0", 0.8, 1.2, 21}, {"hfov", 30.0, 100.0, 8}};
    if (problem == "stub") return {{"x", 0.0, 1.0, 11}, {"y", 0.0, 1.0, 11}};
    throw Error(ErrorKind::Config, "unknown problem '" + problem + "' (valid: pendulum, daa, stub)");
}

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorKind::Config, where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) {
            std::string valid;
            for (const auto& a : allowed) valid += (valid.empty() ? "" : ", ") + a;
            throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + where + " (allowed: " + valid + ")");
        }
}

inline double get_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw Error(ErrorKind::Config, what + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorKind::Config, what + " must be finite");
    return d;
}

inline std::int64_t get_integer(const json& v, const std::string& what) {
    if (!v.is_number_integer()) throw Error(ErrorKind::Config, what + " must be an integer");
    return v.get<std::int64_t>();
}

inline std::uint64_t get_unsigned(const json& v, const std::string& what) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw Error(ErrorKind::Config, what + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline bool get_bool(const json& v, const std::string& what) {
    if (!v.is_boolean()) throw Error(ErrorKind::Config, what + " must be true or false");
    return v.get<bool>();
}

inline std::string get_string(const json& v, const std::string& what) {
    if (!v.is_string()) throw Error(ErrorKind::Config, what + " must be a string");
    return v.get<std::string>();
}

struct DoubleField {
    const char* key;
    double* target;
};

struct IntField {
    const char* key;
    int* target;
};

inline void apply_fields(const json& j, const std::vector<DoubleField>& doubles, const std::vector<IntField>& ints,
                         const std::string& where) {
    std::set<std::string> allowed;
    for (const auto& f : doubles) allowed.insert(f.key);
    for (const auto& f : ints) allowed.insert(f.key);
    check_keys(j, allowed, where);
    for (const auto& f : doubles)
        if (j.contains(f.key)) *f.target = get_number(j[f.key], where + "." + f.key);
    for (const auto& f : ints)
        if (j.contains(f.key)) {
            const auto v = get_integer(j[f.key], where + "." + f.key);
            if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
                throw Error(ErrorKind::Config, where + "." + f.key + " is out of range");
            *f.target = static_cast<int>(v);
        }
}

inline std::string spacing_name(LengthSpacing s) { return s == LengthSpacing::Linear ? "linear" : "log"; }

inline LengthSpacing parse_spacing(const std::string& s) {
    if (s == "linear") return LengthSpacing::Linear;
    if (s == "log") return LengthSpacing::Logarithmic;
    throw Error(ErrorKind::Config, "unknown length spacing '" + s + "' (valid: linear, log)");
}

inline json lgrid_json(const LengthGridSpec& g) {
    return {{"bins", g.bins}, {"lo", g.lo}, {"hi", g.hi}, {"spacing", spacing_name(g.spacing)}};
}

} // namespace detail

inline sim::Simulator make_configured_simulator(const std::string& problem, const json& overrides) {
    const std::string where = "simulator";
    if (problem == "pendulum") {
        sim::PendulumConfig c;
        detail::apply_fields(overrides,
                             {{"dt", &c.dt},
                              {"gravity", &c.gravity},
                              {"length", &c.length},
                              {"mass", &c.mass},
                              {"torque_limit", &c.torque_limit},
                              {"kp", &c.kp},
                              {"kd", &c.kd},
                              {"theta0_max", &c.theta0_max},
                              {"omega0_max", &c.omega0_max},
                              {"fail_angle", &c.fail_angle}},
                             {{"horizon", &c.horizon}}, where);
        return sim::make_pendulum(c);
    }
    if (problem == "daa") {
        sim::DaaConfig c;
        detail::apply_fields(overrides,
                             {{"nmac_radius", &c.nmac_radius},
                              {"step", &c.step},
                              {"own_speed_lo", &c.own_speed_lo},
                              {"own_speed_hi", &c.own_speed_hi},
                              {"intr_speed_lo", &c.intr_speed_lo},
                              {"intr_speed_hi", &c.intr_speed_hi},
                              {"tcpa_lo", &c.tcpa_lo},
                              {"tcpa_hi", &c.tcpa_hi},
                              {"miss_max", &c.miss_max},
                              {"heading_sd_deg", &c.heading_sd_deg},
                              {"turn_rate_deg", &c.turn_rate_deg},
                              {"max_turn_deg", &c.max_turn_deg},
                              {"response_delay", &c.response_delay}},
                             {{"horizon", &c.horizon}, {"substeps", &c.substeps}}, where);
        return sim::make_daa(c);
    }
    if (problem == "stub") {
        sim::StubConfig c;
        detail::check_keys(overrides, {"intercept", "slope"}, where);
        if (overrides.contains("intercept")) c.intercept = detail::get_number(overrides["intercept"], "simulator.intercept");
        if (overrides.contains("slope")) {
            if (!overrides["slope"].is_array()) throw Error(ErrorKind::Config, "simulator.slope must be an array");
            for (const auto& v : overrides["slope"]) c.slope.push_back(detail::get_number(v, "simulator.slope"));
        }
        return sim::make_stub(c);
    }
    throw Error(ErrorKind::Config, "unknown problem '" + problem + "' (valid: pendulum, daa, stub)");
}

inline sim::Simulator make_configured_simulator(const RunConfig& cfg) {
    return make_configured_simulator(cfg.problem, cfg.simulator);
}

inline MethodSpec parse_method(const json& j) {
    detail::check_keys(j,
                       {"kind", "length", "weights", "c", "episodes_per_eval", "lgrid", "refresh_every", "leave_one_out",
                        "theta_bins", "prune"},
                       "method");
    if (!j.contains("kind")) throw Error(ErrorKind::Config, "method.kind is required");
    MethodSpec m;
    m.kind = parse_method_kind(detail::get_string(j["kind"], "method.kind"));
    if (j.contains("length")) m.length = detail::get_number(j["length"], "method.length");
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        if (!w.is_array()) throw Error(ErrorKind::Config, "method.weights must be an array");
        for (const auto& row : w) {
            if (row.is_array()) {
                for (const auto& v : row) m.weights.push_back(detail::get_number(v, "method.weights"));
            } else {
                m.weights.push_back(detail::get_number(row, "method.weights"));
            }
        }
    }
    if (j.contains("c")) m.c = detail::get_number(j["c"], "method.c");
    if (j.contains("episodes_per_eval")) {
        const auto v = detail::get_integer(j["episodes_per_eval"], "method.episodes_per_eval");
        require(v >= 1 && v <= 1'000'000, "method.episodes_per_eval must lie in [1, 1e6]", ErrorKind::Config);
        m.episodes_per_eval = static_cast<int>(v);
    }
    if (j.contains("lgrid")) {
        const auto& g = j["lgrid"];
        detail::check_keys(g, {"bins", "lo", "hi", "spacing"}, "method.lgrid");
        LengthGridSpec spec;
        if (g.contains("bins")) {
            const auto b = detail::get_integer(g["bins"], "method.lgrid.bins");
            require(b >= 2, "method.lgrid.bins must be at least 2", ErrorKind::Config);
            spec.bins = static_cast<std::size_t>(b);
        }
        if (!g.contains("lo") || !g.contains("hi")) throw Error(ErrorKind::Config, "method.lgrid needs lo and hi");
        spec.lo = detail::get_number(g["lo"], "method.lgrid.lo");
        spec.hi = detail::get_number(g["hi"], "method.lgrid.hi");
        if (g.contains("spacing")) spec.spacing = detail::parse_spacing(detail::get_string(g["spacing"], "method.lgrid.spacing"));
        m.lgrid = spec;
    }
    if (j.contains("refresh_every")) {
        const auto v = detail::get_integer(j["refresh_every"], "method.refresh_every");
        require(v >= 1 && v <= std::numeric_limits<int>::max(), "method.refresh_every must be positive",
                ErrorKind::Config);
        m.refresh_every = static_cast<int>(v);
    }
    if (j.contains("leave_one_out")) m.leave_one_out = detail::get_bool(j["leave_one_out"], "method.leave_one_out");
    if (j.contains("theta_bins")) {
        const auto v = detail::get_integer(j["theta_bins"], "method.theta_bins");
        require(v >= 10, "method.theta_bins must be at least 10", ErrorKind::Config);
        m.theta_bins = static_cast<std::size_t>(v);
    }
    if (j.contains("prune")) m.prune = detail::get_number(j["prune"], "method.prune");
    return m;
}

inline json method_json(const MethodSpec& m) {
    json j = {{"kind", method_name(m.kind)},
              {"length", m.length},
              {"c", m.c},
              {"episodes_per_eval", m.episodes_per_eval},
              {"refresh_every", m.refresh_every},
              {"leave_one_out", m.leave_one_out},
              {"theta_bins", m.theta_bins},
              {"prune", m.prune}};
    j["weights"] = m.weights;
    if (m.lgrid) j["lgrid"] = detail::lgrid_json(*m.lgrid);
    return j;
}

inline json grid_json(const std::vector<GridDim>& dims) {
    json a = json::array();
    for (const auto& d : dims) a.push_back({{"name", d.name}, {"lo", d.lo}, {"hi", d.hi}, {"count", d.count}});
    return a;
}

inline std::vector<GridDim> parse_grid(const json& j) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::Config, "grid must be a non-empty array");
    std::vector<GridDim> dims;
    for (const auto& d : j) {
        detail::check_keys(d, {"name", "lo", "hi", "count"}, "grid entry");
        for (const char* k : {"name", "lo", "hi", "count"})
            if (!d.contains(k)) throw Error(ErrorKind::Config, std::string("grid entry needs '") + k + "'");
        GridDim g;
        g.name = detail::get_string(d["name"], "grid.name");
        g.lo = detail::get_number(d["lo"], "grid.lo");
        g.hi = detail::get_number(d["hi"], "grid.hi");
        const auto c = detail::get_integer(d["count"], "grid.count");
        require(c >= 1, "grid.count must be at least 1", ErrorKind::Config);
        g.count = static_cast<std::size_t>(c);
        dims.push_back(std::move(g));
    }
    return dims;
}

/// Every field of the resolved configuration, with keys sorted.
inline json config_json(const RunConfig& c) {
    return {{"problem", c.problem},
            {"grid", grid_json(c.grid)},
            {"safety", {{"gamma", c.safety.gamma}, {"delta", c.safety.delta}}},
            {"method", method_json(c.method)},
            {"budget", c.budget},
            {"seed", c.seed},
            {"checkpoint_every", c.checkpoint_every},
            {"threads", c.threads},
            {"ground_truth", {{"n_per_point", c.truth.n_per_point}, {"seed", c.truth.seed}}},
            {"outputs", {{"ground_truth", c.outputs.ground_truth}, {"prefix", c.outputs.prefix}}},
            {"simulator", c.simulator}};
}

/// Checks the grid, safety, method, and simulator settings together.
inline void validate_config(const RunConfig& c) {
    try {
        const ParamGrid grid = c.build_grid();
        c.safety.validate();
        c.method.validate(grid.dim());
        (void)make_configured_simulator(c);
        if (c.problem == "pendulum") require(grid.dim() == 2, "pendulum grids have 2 dimensions", ErrorKind::Config);
        if (c.problem == "daa") require(grid.dim() == 3, "daa grids have 3 dimensions", ErrorKind::Config);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, e.what());
    }
    require(c.budget >= 1, "budget must be at least 1", ErrorKind::Config);
    require(c.checkpoint_every >= 1, "checkpoint_every must be at least 1", ErrorKind::Config);
    require(c.threads >= 1, "threads must be at least 1", ErrorKind::Config);
    require(c.truth.n_per_point >= 1, "ground_truth.n_per_point must be at least 1", ErrorKind::Config);
}

inline RunConfig parse_config(const json& j) {
    detail::check_keys(j,
                       {"problem", "grid", "safety", "method", "budget", "seed", "checkpoint_every", "threads",
                        "ground_truth", "outputs", "simulator"},
                       "config");
    RunConfig c;
    if (!j.contains("problem")) throw Error(ErrorKind::Config, "config.problem is required");
    c.problem = detail::get_string(j["problem"], "problem");
    c.grid = j.contains("grid") ? parse_grid(j["grid"]) : default_grid(c.problem);
    if (j.contains("safety")) {
        const auto& s = j["safety"];
        detail::check_keys(s, {"gamma", "delta"}, "safety");
        if (s.contains("gamma")) c.safety.gamma = detail::get_number(s["gamma"], "safety.gamma");
        if (s.contains("delta")) c.safety.delta = detail::get_number(s["delta"], "safety.delta");
    }
    if (!j.contains("method")) throw Error(ErrorKind::Config, "config.method is required");
    c.method = parse_method(j["method"]);
    if (j.contains("budget")) c.budget = detail::get_integer(j["budget"], "budget");
    if (j.contains("seed")) c.seed = detail::get_unsigned(j["seed"], "seed");
    if (j.contains("checkpoint_every")) {
        const auto v = detail::get_integer(j["checkpoint_every"], "checkpoint_every");
        require(v >= 1 && v <= std::numeric_limits<int>::max(), "checkpoint_every must be positive", ErrorKind::Config);
        c.checkpoint_every = static_cast<int>(v);
    }
    if (j.contains("threads")) {
        const auto v = detail::get_integer(j["threads"], "threads");
        require(v >= 1 && v <= 4096, "threads must lie in [1, 4096]", ErrorKind::Config);
        c.threads = static_cast<unsigned>(v);
    }
    if (j.contains("ground_truth")) {
        const auto& g = j["ground_truth"];
        detail::check_keys(g, {"n_per_point", "seed"}, "ground_truth");
        if (g.contains("n_per_point")) c.truth.n_per_point = detail::get_integer(g["n_per_point"], "ground_truth.n_per_point");
        if (g.contains("seed")) c.truth.seed = detail::get_unsigned(g["seed"], "ground_truth.seed");
    }
    if (j.contains("outputs")) {
        const auto& o = j["outputs"];
        detail::check_keys(o, {"ground_truth", "prefix"}, "outputs");
        if (o.contains("ground_truth")) c.outputs.ground_truth = detail::get_string(o["ground_truth"], "outputs.ground_truth");
        if (o.contains("prefix")) c.outputs.prefix = detail::get_string(o["prefix"], "outputs.prefix");
    }
    if (j.contains("simulator")) c.simulator = j["simulator"];
    validate_config(c);
    return c;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, "invalid JSON in '" + origin + "': " + e.what());
    }
}

/// Loads a config file. A run manifest is also accepted: its embedded config
/// is used after its content hash is checked.
inline RunConfig load_config(const std::string& path) {
    const json j = parse_json_text(read_file(path), path);
    if (j.is_object() && j.contains("manifest_version")) {
        if (!j.contains("config") || !j.contains("config_hash"))
            throw Error(ErrorKind::Config, "manifest '" + path + "' lacks config or config_hash");
        RunConfig c = parse_config(j["config"]);
        if (git_blob_hash(config_json(c).dump()) != j["config_hash"].get<std::string>())
            throw Error(ErrorKind::Config, "manifest '" + path + "' config hash does not match its config");
        return c;
    }
    return parse_config(j);
}

/// SAFESET_SEED and SAFESET_THREADS override the config file.
inline void apply_environment(RunConfig& c) {
    auto read = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    try {
        if (auto s = read("SAFESET_SEED")) c.seed = static_cast<std::uint64_t>(parse_int(*s, "SAFESET_SEED"));
        if (auto t = read("SAFESET_THREADS")) {
            const auto v = parse_int(*t, "SAFESET_THREADS");
            require(v >= 1 && v <= 4096, "SAFESET_THREADS must lie in [1, 4096]", ErrorKind::Config);
            c.threads = static_cast<unsigned>(v);
        }
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
    }
}

// ---------------------------------------------------------------------------
// Artifacts

inline std::vector<std::string> coordinate_fields(const ParamGrid& grid, std::size_t i) {
    std::vector<std::string> out;
    const auto p = grid.point(i);
    for (double v : p) out.push_back(format_double(v));
    return out;
}

inline std::vector<std::string> point_header(const ParamGrid& grid, std::vector<std::string> tail) {
    std::vector<std::string> h{"flat_index"};
    for (const auto& d : grid.dims()) h.push_back(d.name);
    h.insert(h.end(), tail.begin(), tail.end());
    return h;
}

inline std::string ground_truth_csv(const ParamGrid& grid, const GroundTruth& truth) {
    require(truth.size() == grid.size(), "ground truth does not match grid");
    std::string out = csv_row(point_header(grid, {"p_fail_hat", "n", "safe"}));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (auto& f : coordinate_fields(grid, i)) row.push_back(std::move(f));
        row.push_back(format_double(truth.p_fail_hat[i]));
        row.push_back(std::to_string(truth.n_per_point));
        row.push_back(truth.safe_mask[i] ? "1" : "0");
        out += csv_row(row);
    }
    return out;
}

/// Grid coordinates as read back from a point-indexed CSV.
struct PointTable {
    std::vector<std::string> dim_names;
    std::vector<std::vector<double>> coords;
};

namespace detail {

inline PointTable read_points(const CsvTable& t, const std::vector<std::string>& tail, const std::string& origin) {
    require(t.header.size() >= 1 + tail.size() && t.header.front() == "flat_index",
            "'" + origin + "' does not start with flat_index", ErrorKind::Io);
    const std::size_t ndim = t.header.size() - 1 - tail.size();
    for (std::size_t k = 0; k < tail.size(); ++k)
        require(t.header[1 + ndim + k] == tail[k], "'" + origin + "' is missing column '" + tail[k] + "'", ErrorKind::Io);
    PointTable pts;
    pts.dim_names.assign(t.header.begin() + 1, t.header.begin() + 1 + static_cast<std::ptrdiff_t>(ndim));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        require(parse_int(t.rows[r][0], "flat_index") == static_cast<std::int64_t>(r),
                "'" + origin + "' rows are not in flat-index order", ErrorKind::Io);
        std::vector<double> c(ndim);
        for (std::size_t k = 0; k < ndim; ++k) c[k] = parse_double(t.rows[r][1 + k], pts.dim_names[k]);
        pts.coords.push_back(std::move(c));
    }
    return pts;
}

inline bool parse_flag(const std::string& s, const std::string& what) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw Error(ErrorKind::Io, what + " must be 0 or 1, got '" + s + "'");
}

} // namespace detail

/// True when both tables describe the same grid points.
inline bool same_points(const PointTable& a, const PointTable& b) {
    if (a.dim_names != b.dim_names || a.coords.size() != b.coords.size()) return false;
    for (std::size_t i = 0; i < a.coords.size(); ++i)
        for (std::size_t k = 0; k < a.coords[i].size(); ++k)
            if (std::abs(a.coords[i][k] - b.coords[i][k]) > 1e-9 * std::max(1.0, std::abs(a.coords[i][k])))
                return false;
    return true;
}

inline PointTable grid_points(const ParamGrid& grid) {
    PointTable t;
    for (const auto& d : grid.dims()) t.dim_names.push_back(d.name);
    for (std::size_t i = 0; i < grid.size(); ++i) t.coords.push_back(grid.point(i));
    return t;
}

struct TruthFile {
    PointTable points;
    GroundTruth truth;
};

inline TruthFile parse_ground_truth(const std::string& text, const std::string& origin) {
    const CsvTable t = parse_csv(text);
    TruthFile f;
    f.points = detail::read_points(t, {"p_fail_hat", "n", "safe"}, origin);
    const std::size_t base = 1 + f.points.dim_names.size();
    for (const auto& row : t.rows) {
        f.truth.p_fail_hat.push_back(parse_double(row[base], "p_fail_hat"));
        const auto n = parse_int(row[base + 1], "n");
        if (f.truth.n_per_point == 0) f.truth.n_per_point = n;
        require(n == f.truth.n_per_point, "'" + origin + "' has inconsistent n", ErrorKind::Io);
        f.truth.safe_mask.push_back(detail::parse_flag(row[base + 2], "safe"));
    }
    return f;
}

inline TruthFile read_ground_truth(const std::string& path) { return parse_ground_truth(read_file(path), path); }

inline std::string trace_csv(const ParamGrid& grid, const RunTrace& trace) {
    std::vector<std::string> h{"episode", "flat_index"};
    for (const auto& d : grid.dims()) h.push_back(d.name);
    h.push_back("safe");
    std::string out = csv_row(h);
    for (const auto& e : trace.episodes) {
        std::vector<std::string> row{std::to_string(e.episode), std::to_string(e.index)};
        for (auto& f : coordinate_fields(grid, e.index)) row.push_back(std::move(f));
        row.push_back(e.safe ? "1" : "0");
        out += csv_row(row);
    }
    return out;
}

inline std::vector<EpisodeRecord> parse_trace(const std::string& text) {
    const CsvTable t = parse_csv(text);
    const std::size_t ep = t.column("episode"), idx = t.column("flat_index"), safe = t.column("safe");
    std::vector<EpisodeRecord> out;
    for (const auto& row : t.rows)
        out.push_back({parse_int(row[ep], "episode"), static_cast<std::size_t>(parse_int(row[idx], "flat_index")),
                       detail::parse_flag(row[safe], "safe")});
    return out;
}

/// Final safe set with its test statistic, plus the posterior-mean kernel
/// length when the method learns one.
inline std::string mask_csv(const ParamGrid& grid, const SafeSetEstimate& est, const std::vector<double>& mean_length) {
    require(est.size() == grid.size(), "estimate does not match grid");
    const bool with_length = !mean_length.empty();
    std::vector<std::string> tail{"safe", "statistic"};
    if (with_length) tail.push_back("mean_length");
    std::string out = csv_row(point_header(grid, tail));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (auto& f : coordinate_fields(grid, i)) row.push_back(std::move(f));
        row.push_back(est.mask[i] ? "1" : "0");
        row.push_back(i < est.statistic.size() ? format_double(est.statistic[i]) : "");
        if (with_length) row.push_back(format_double(mean_length[i]));
        out += csv_row(row);
    }
    return out;
}

struct MaskFile {
    PointTable points;
    std::vector<bool> mask;
    std::vector<double> statistic;
    std::vector<double> mean_length;
};

inline MaskFile parse_mask(const std::string& text, const std::string& origin) {
    const CsvTable t = parse_csv(text);
    const bool with_length = !t.header.empty() && t.header.back() == "mean_length";
    std::vector<std::string> tail{"safe", "statistic"};
    if (with_length) tail.push_back("mean_length");
    MaskFile f;
    f.points = detail::read_points(t, tail, origin);
    const std::size_t base = 1 + f.points.dim_names.size();
    for (const auto& row : t.rows) {
        f.mask.push_back(detail::parse_flag(row[base], "safe"));
        f.statistic.push_back(row[base + 1].empty() ? 0.0 : parse_double(row[base + 1], "statistic"));
        if (with_length) f.mean_length.push_back(parse_double(row[base + 2], "mean_length"));
    }
    return f;
}

/// Checkpoint masks in long form: one row per safe point, and a row with an
/// empty flat_index for a checkpoint whose mask is empty.
inline std::string checkpoints_csv(const RunTrace& trace) {
    std::string out = csv_row({"episode", "flat_index"});
    for (const auto& cp : trace.checkpoints) {
        bool any = false;
        for (std::size_t i = 0; i < cp.mask.size(); ++i)
            if (cp.mask[i]) {
                out += csv_row({std::to_string(cp.episode), std::to_string(i)});
                any = true;
            }
        if (!any) out += csv_row({std::to_string(cp.episode), ""});
    }
    return out;
}

inline std::vector<Checkpoint> parse_checkpoints(const std::string& text, std::size_t grid_size) {
    const CsvTable t = parse_csv(text);
    const std::size_t ep = t.column("episode"), idx = t.column("flat_index");
    std::vector<Checkpoint> out;
    for (const auto& row : t.rows) {
        const auto e = parse_int(row[ep], "episode");
        if (out.empty() || out.back().episode != e) {
            require(out.empty() || e > out.back().episode, "checkpoint episodes must increase", ErrorKind::Io);
            out.push_back({e, std::vector<bool>(grid_size, false), std::nullopt, std::nullopt});
        }
        if (row[idx].empty()) continue;
        const auto i = parse_int(row[idx], "flat_index");
        require(i >= 0 && static_cast<std::size_t>(i) < grid_size, "checkpoint index outside the grid", ErrorKind::Io);
        out.back().mask[static_cast<std::size_t>(i)] = true;
    }
    return out;
}

struct ArtifactPaths {
    std::string trace, mask, checkpoints, manifest;
};

inline ArtifactPaths artifact_paths(const std::string& prefix) {
    return {prefix + ".trace.csv", prefix + ".mask.csv", prefix + ".checkpoints.csv", prefix + ".manifest.json"};
}

/// Effective hyperparameters, including the resolved length grid.
inline json hyperparameters_json(const RunConfig& c) {
    json h = method_json(c.method);
    h.erase("kind");
    if (c.method.kind == MethodKind::SmoothingLearned && !c.method.lgrid) {
        const ParamGrid grid = c.build_grid();
        h["lgrid"] = detail::lgrid_json(LengthGridSpec::for_grid(grid, KernelSpec{1.0, c.method.weights}));
    }
    return h;
}

inline json manifest_json(const RunConfig& c, const RunResult& r) {
    const json cfg = config_json(c);
    const auto paths = artifact_paths(c.outputs.prefix);
    return {{"manifest_version", 1},
            {"config", cfg},
            {"config_hash", git_blob_hash(cfg.dump())},
            {"problem", c.problem},
            {"method", method_name(c.method.kind)},
            {"hyperparameters", hyperparameters_json(c)},
            {"safety", {{"gamma", c.safety.gamma}, {"delta", c.safety.delta}}},
            {"seed", c.seed},
            {"budget", c.budget},
            {"grid", grid_json(c.grid)},
            {"episodes_used", r.trace.used()},
            {"saturated", r.trace.saturated},
            {"safe_set_size", r.estimate.count()},
            {"files",
             {{"trace", std::filesystem::path(paths.trace).filename().string()},
              {"mask", std::filesystem::path(paths.mask).filename().string()},
              {"checkpoints", std::filesystem::path(paths.checkpoints).filename().string()}}}};
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

/// Writes the four estimate artifacts under c.outputs.prefix.
inline void write_estimate(const RunConfig& c, const ParamGrid& grid, const RunResult& r) {
    const auto paths = artifact_paths(c.outputs.prefix);
    write_file(paths.trace, trace_csv(grid, r.trace));
    write_file(paths.mask, mask_csv(grid, r.estimate, r.mean_length));
    write_file(paths.checkpoints, checkpoints_csv(r.trace));
    write_file(paths.manifest, dump_json(manifest_json(c, r)));
}

} // namespace safeset::io
