#include "edlab/experiments.hpp"

#include "config_internal.hpp"
#include "edlab/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <type_traits>

namespace edlab {

namespace {

struct KindName {
    ExperimentKind kind;
    std::string_view name;
    std::string_view summary;
};

constexpr std::array<KindName, 8> kKinds{{
    {ExperimentKind::free_packet, "free_packet", "free Gaussian packet against the analytic oracle; moments, uncertainty slack, energy, QHJ convergence"},
    {ExperimentKind::harmonic, "harmonic", "harmonic-oscillator state under the μ-family equation; stationarity, energy, QHJ residual"},
    {ExperimentKind::hybrid_static, "hybrid_static", "μ=0 static Gaussian with a walker ensemble, paired with the spreading μ=m run"},
    {ExperimentKind::ensemble_consistency, "ensemble_consistency", "walker ensemble driven by b from the evolving packet versus |Ψ|², plus Fokker-Planck tracking"},
    {ExperimentKind::classical_limit_scan, "classical_limit_scan", "fluctuation variance and spreading excess across an ħ scan"},
    {ExperimentKind::regraduation_check, "regraduation_check", "κ map of (η, μ) and comparison of the two evolved densities"},
    {ExperimentKind::drift_ur_scan, "drift_ur_scan", "Cov(x, p_d) on Gaussian ρ with S = kx²/2 across a width scan"},
    {ExperimentKind::ur_corpus, "ur_corpus", "momentum identities and uncertainty relations over random and oracle states"},
}};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError{path + ": " + what};
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string{s.substr(first, last - first + 1)};
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

double parse_double(const std::string& path, const std::string& text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) fail(path, "expected a number, got '" + text + "'");
    if (!std::isfinite(value)) fail(path, "value must be finite");
    return value;
}

std::uint64_t parse_unsigned(const std::string& path, const std::string& text) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(path, "expected a non-negative integer, got '" + text + "'");
    }
    return value;
}

std::vector<double> parse_list(const std::string& path, std::string text) {
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']') fail(path, "unterminated list");
        text = text.substr(1, text.size() - 2);
    }
    std::vector<double> out;
    std::stringstream in{text};
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string value = trim(item);
        if (value.empty()) fail(path, "empty list entry");
        out.push_back(parse_double(path, value));
    }
    if (out.empty()) fail(path, "list must not be empty");
    return out;
}

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format_list(const std::vector<double>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_number(values[i]);
    }
    return out + "]";
}

struct KeySpec {
    std::function<void(ExperimentConfig&, const std::string& path, const std::string& value)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename Member>
KeySpec real_key(Member member) {
    return {[member](ExperimentConfig& c, const std::string& path, const std::string& v) { member(c) = parse_double(path, v); },
            [member](const ExperimentConfig& c) { return format_number(member(c)); }};
}

template <typename Member>
KeySpec count_key(Member member) {
    return {[member](ExperimentConfig& c, const std::string& path, const std::string& v) {
                member(c) = static_cast<std::remove_cvref_t<decltype(member(c))>>(parse_unsigned(path, v));
            },
            [member](const ExperimentConfig& c) { return std::to_string(member(c)); }};
}

template <typename Member>
KeySpec list_key(Member member) {
    return {[member](ExperimentConfig& c, const std::string& path, const std::string& v) { member(c) = parse_list(path, v); },
            [member](const ExperimentConfig& c) { return format_list(member(c)); }};
}

const std::map<std::string, KeySpec>& key_table() {
    static const std::map<std::string, KeySpec> table = [] {
        std::map<std::string, KeySpec> t;
        t["experiment.name"] = {[](ExperimentConfig&, const std::string&, const std::string&) {},
                                [](const ExperimentConfig& c) { return std::string{experiment_name(c.kind)}; }};
        t["grid.n"] = count_key([](auto& c) -> auto& { return c.n; });
        t["grid.x_min"] = real_key([](auto& c) -> auto& { return c.x_min; });
        t["grid.x_max"] = real_key([](auto& c) -> auto& { return c.x_max; });
        t["physics.hbar"] = real_key([](auto& c) -> auto& { return c.params.hbar; });
        t["physics.m"] = real_key([](auto& c) -> auto& { return c.params.m; });
        t["physics.mu"] = real_key([](auto& c) -> auto& { return c.params.mu; });
        t["physics.sigma0"] = real_key([](auto& c) -> auto& { return c.sigma0; });
        t["physics.x0"] = real_key([](auto& c) -> auto& { return c.x0; });
        t["physics.p0"] = real_key([](auto& c) -> auto& { return c.p0; });
        t["physics.omega"] = real_key([](auto& c) -> auto& { return c.omega; });
        t["physics.kappa"] = real_key([](auto& c) -> auto& { return c.kappa; });
        t["physics.curvature"] = real_key([](auto& c) -> auto& { return c.curvature; });
        t["physics.hbar_scan"] = list_key([](auto& c) -> auto& { return c.hbar_scan; });
        t["physics.sigmas"] = list_key([](auto& c) -> auto& { return c.sigmas; });
        t["run.dt"] = real_key([](auto& c) -> auto& { return c.dt; });
        t["run.t_final"] = real_key([](auto& c) -> auto& { return c.t_final; });
        t["run.output_stride"] = count_key([](auto& c) -> auto& { return c.output_stride; });
        t["run.walkers"] = count_key([](auto& c) -> auto& { return c.walkers; });
        t["run.seed"] = count_key([](auto& c) -> auto& { return c.seed; });
        t["run.corpus_size"] = count_key([](auto& c) -> auto& { return c.corpus_size; });
        t["run.corpus_seed"] = count_key([](auto& c) -> auto& { return c.corpus_seed; });
        return t;
    }();
    return table;
}

std::vector<std::string> with_common(std::initializer_list<const char*> extra) {
    std::vector<std::string> keys{"experiment.name", "grid.n", "grid.x_min", "grid.x_max", "physics.hbar", "physics.m"};
    keys.insert(keys.end(), extra.begin(), extra.end());
    return keys;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace

std::string_view experiment_name(ExperimentKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k.name;
    }
    return "unknown";
}

std::optional<ExperimentKind> experiment_from_name(std::string_view name) {
    for (const auto& k : kKinds) {
        if (k.name == name) return k.kind;
    }
    return std::nullopt;
}

std::string_view experiment_summary(ExperimentKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k.summary;
    }
    return {};
}

const std::vector<std::string>& experiment_keys(ExperimentKind kind) {
    static const std::map<ExperimentKind, std::vector<std::string>> keys{
        {ExperimentKind::free_packet,
         with_common({"physics.mu", "physics.sigma0", "physics.x0", "physics.p0", "run.dt", "run.t_final", "run.output_stride"})},
        {ExperimentKind::harmonic,
         with_common({"physics.mu", "physics.omega", "physics.x0", "run.dt", "run.t_final", "run.output_stride"})},
        {ExperimentKind::hybrid_static,
         with_common({"physics.sigma0", "run.dt", "run.t_final", "run.output_stride", "run.walkers", "run.seed"})},
        {ExperimentKind::ensemble_consistency,
         with_common({"physics.sigma0", "physics.x0", "physics.p0", "run.dt", "run.t_final", "run.output_stride",
                      "run.walkers", "run.seed"})},
        {ExperimentKind::classical_limit_scan,
         {"experiment.name", "grid.n", "grid.x_min", "grid.x_max", "physics.m", "physics.sigma0", "physics.hbar_scan",
          "run.dt", "run.t_final", "run.walkers", "run.seed"}},
        {ExperimentKind::regraduation_check,
         with_common({"physics.mu", "physics.kappa", "physics.sigma0", "physics.x0", "physics.p0", "run.dt", "run.t_final",
                      "run.output_stride"})},
        {ExperimentKind::drift_ur_scan, with_common({"physics.sigmas", "physics.curvature"})},
        {ExperimentKind::ur_corpus, with_common({"run.corpus_size", "run.corpus_seed"})},
    };
    return keys.at(kind);
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
    case ExperimentKind::harmonic:
    case ExperimentKind::classical_limit_scan:
        c.t_final = 1.0;
        break;
    case ExperimentKind::hybrid_static:
        c.params.mu = 0.0;
        break;
    case ExperimentKind::regraduation_check:
        c.params.mu = 0.25;
        c.t_final = 1.0;
        break;
    case ExperimentKind::drift_ur_scan:
        c.n = 4096;
        break;
    default:
        break;
    }
    return c;
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& key : experiment_keys(config.kind)) out.emplace_back(key, key_table().at(key).get(config));
    return out;
}

namespace detail {

std::size_t step_count(const ExperimentConfig& c) {
    return static_cast<std::size_t>(std::llround(c.t_final / c.dt));
}

void validate_ranges(const ExperimentConfig& c) {
    const auto& keys = experiment_keys(c.kind);
    auto uses = [&](const char* key) { return std::find(keys.begin(), keys.end(), key) != keys.end(); };

    if (!is_power_of_two(c.n) || c.n < 64) fail("grid.n", "must be a power of two >= 64");
    if (!(c.x_max > c.x_min)) fail("grid.x_max", "must exceed grid.x_min");
    if (uses("physics.hbar") && !(c.params.hbar > 0.0)) fail("physics.hbar", "must be > 0");
    if (!(c.params.m > 0.0)) fail("physics.m", "must be > 0");
    if (uses("physics.mu") && !(c.params.mu >= 0.0)) fail("physics.mu", "must be >= 0");
    if (uses("physics.sigma0") && !(c.sigma0 > 0.0)) fail("physics.sigma0", "must be > 0");
    if (uses("physics.omega") && !(c.omega > 0.0)) fail("physics.omega", "must be > 0");
    if (uses("physics.kappa") && !(c.kappa > 0.0)) fail("physics.kappa", "must be > 0");
    if (uses("physics.hbar_scan")) {
        if (c.hbar_scan.size() < 2) fail("physics.hbar_scan", "needs at least two values");
        for (double h : c.hbar_scan) {
            if (!(h > 0.0)) fail("physics.hbar_scan", "values must be > 0");
        }
        auto sorted = c.hbar_scan;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("physics.hbar_scan", "values must be distinct");
    }
    if (uses("physics.sigmas")) {
        for (double s : c.sigmas) {
            if (!(s > 0.0)) fail("physics.sigmas", "values must be > 0");
        }
    }
    if (uses("run.dt")) {
        if (!(c.dt > 0.0)) fail("run.dt", "must be > 0");
        if (!(c.t_final > 0.0)) fail("run.t_final", "must be > 0");
        const auto steps = step_count(c);
        if (steps == 0 || std::abs(static_cast<double>(steps) * c.dt - c.t_final) > 1e-9 * c.t_final) {
            fail("run.t_final", "must be an integer multiple of run.dt");
        }
    }
    if (uses("run.output_stride") && c.output_stride == 0) fail("run.output_stride", "must be >= 1");
    if (uses("run.walkers") && c.walkers == 0) fail("run.walkers", "must be >= 1");
    if (uses("run.corpus_size") && c.corpus_size == 0) fail("run.corpus_size", "must be >= 1");
}

} // namespace detail

ExperimentConfig parse_config(std::string_view text) {
    struct Entry {
        std::string value;
        std::size_t line;
    };
    std::map<std::string, Entry> entries;
    std::vector<std::string> order;
    std::string section;
    std::size_t line_no = 0;
    std::stringstream in{std::string{text}};
    std::string raw;
    const std::array<std::string_view, 4> sections{"experiment", "grid", "physics", "run"};

    while (std::getline(in, raw)) {
        ++line_no;
        const auto cut = raw.find_first_of("#;");
        const std::string line = trim(cut == std::string::npos ? std::string_view{raw} : std::string_view{raw}.substr(0, cut));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') fail(where, "malformed section header '" + line + "'");
            section = trim(std::string_view{line}.substr(1, line.size() - 2));
            if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
                fail("[" + section + "]", "unknown section");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(where, "expected 'key = value'");
        const std::string key = trim(std::string_view{line}.substr(0, eq));
        const std::string value = unquote(trim(std::string_view{line}.substr(eq + 1)));
        if (key.empty()) fail(where, "missing key");
        if (section.empty()) fail(key, "key outside of any section");
        const std::string path = section + "." + key;
        if (value.empty()) fail(path, "missing value");
        if (auto it = entries.find(path); it != entries.end()) {
            fail(path, "duplicate key (first set on line " + std::to_string(it->second.line) + ")");
        }
        entries.emplace(path, Entry{value, line_no});
        order.push_back(path);
    }

    const auto name_it = entries.find("experiment.name");
    if (name_it == entries.end()) fail("experiment.name", "missing");
    const auto kind = experiment_from_name(name_it->second.value);
    if (!kind) fail("experiment.name", "unknown experiment '" + name_it->second.value + "'");

    ExperimentConfig config = default_config(*kind);
    const auto& keys = experiment_keys(*kind);
    bool mu_set = false;
    for (const auto& path : order) {
        if (!key_table().contains(path)) fail(path, "unknown key");
        if (std::find(keys.begin(), keys.end(), path) == keys.end()) {
            fail(path, "not used by experiment '" + std::string{experiment_name(*kind)} + "'");
        }
        key_table().at(path).set(config, path, entries.at(path).value);
        mu_set = mu_set || path == "physics.mu";
    }
    // free_packet and harmonic default to the linear equation for whatever mass was given
    if (!mu_set && (*kind == ExperimentKind::free_packet || *kind == ExperimentKind::harmonic)) {
        config.params.mu = config.params.m;
    }
    detail::validate_ranges(config);
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream file{path};
    if (!file) throw ConfigError{path.string() + ": cannot open config file"};
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse_config(buffer.str());
}

} // namespace edlab
