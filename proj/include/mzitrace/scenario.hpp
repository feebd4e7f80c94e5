#ifndef MZITRACE_SCENARIO_HPP
#define MZITRACE_SCENARIO_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "amplitude.hpp"
#include "barrier.hpp"
#include "errors.hpp"
#include "markers.hpp"

namespace mzitrace {

struct ArmSpec {
    std::string label;
    Amplitude amplitude;
    friend bool operator==(const ArmSpec&, const ArmSpec&) = default;
};

struct PathSpec {
    int index = 0;
    std::vector<std::string> arms;
    std::optional<Amplitude> override_amplitude;
    friend bool operator==(const PathSpec&, const PathSpec&) = default;
};

/// Marker coupling: either a bare eps (flip = -i eps) or barrier parameters (k, Omega).
struct MarkerSpec {
    std::string arm;
    std::variant<double, BarrierParams> coupling;
    friend bool operator==(const MarkerSpec&, const MarkerSpec&) = default;
};

struct MeterSpec {
    std::string arm;
    double delta_f = 1.0;
    friend bool operator==(const MeterSpec&, const MeterSpec&) = default;
};

struct ScenarioOptions {
    bool renormalize = false;
    double smear_width = 0.15;
    int output_grid = 601;
    friend bool operator==(const ScenarioOptions&, const ScenarioOptions&) = default;
};

struct ScenarioSpec {
    std::string name;
    std::vector<ArmSpec> arms;
    std::vector<PathSpec> paths;
    std::vector<MarkerSpec> markers;
    std::vector<MeterSpec> meters;
    ScenarioOptions options;
    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

inline PathNetwork to_network(const ScenarioSpec& spec) {
    std::vector<Arm> arms;
    for (const auto& a : spec.arms) {
        arms.push_back({a.label, a.amplitude});
    }
    std::vector<VirtualPath> paths;
    std::map<int, Amplitude> overrides;
    for (const auto& p : spec.paths) {
        paths.push_back({p.index, p.arms});
        if (p.override_amplitude) {
            overrides[p.index] = *p.override_amplitude;
        }
    }
    return PathNetwork(std::move(arms), std::move(paths), std::move(overrides));
}

inline MarkerSet to_markers(const ScenarioSpec& spec) {
    std::vector<MarkerSite> sites;
    for (const auto& m : spec.markers) {
        if (const auto* eps = std::get_if<double>(&m.coupling)) {
            sites.push_back(MarkerSite::from_coupling(m.arm, *eps));
        } else {
            sites.push_back(marker_from_barrier(std::get<BarrierParams>(m.coupling), m.arm).site);
        }
    }
    return MarkerSet(std::move(sites));
}

/// Copy of `spec` with every marker switched to the bare coupling `eps`.
inline ScenarioSpec with_epsilon(ScenarioSpec spec, double eps) {
    for (auto& m : spec.markers) {
        m.coupling = eps;
    }
    return spec;
}

inline ScenarioSpec with_delta_f(ScenarioSpec spec, double delta_f) {
    for (auto& m : spec.meters) {
        m.delta_f = delta_f;
    }
    return spec;
}

namespace detail {

inline std::string format_real(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::string format_amplitude(Amplitude z) {
    if (z.imag() == 0.0 && !std::signbit(z.imag())) {
        return format_real(z.real());
    }
    return format_real(z.real()) + " " + format_real(z.imag());
}

struct Token {
    std::string_view text;
    std::size_t column = 0;  // 1-based
};

inline std::vector<Token> split_ws(std::string_view text, std::size_t column_offset) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t') {
            ++i;
        }
        if (i > start) {
            out.push_back({text.substr(start, i - start), column_offset + start + 1});
        }
    }
    return out;
}

inline bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
            return false;
        }
    }
    return true;
}

class ScenarioParser {
public:
    explicit ScenarioParser(std::string_view text) : text_(text) {}

    ScenarioSpec parse() {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text_.size()) {
            std::size_t end = text_.find('\n', pos);
            if (end == std::string_view::npos) {
                end = text_.size();
            }
            ++line_no;
            parse_line(text_.substr(pos, end - pos), line_no);
            pos = end + 1;
        }
        resolve();
        return spec_;
    }

private:
    struct Ref {
        std::string what;
        std::size_t line;
        std::size_t column;
    };

    [[noreturn]] void fail(const std::string& message, std::size_t line, std::size_t column) const {
        throw spec_error(message, line, column);
    }

    double parse_number(Token tok, std::size_t line) const {
        std::string_view s = tok.text;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            fail("expected a number, got '" + std::string(s) + "'", line, tok.column);
        }
        return value;
    }

    /// [+-] number | [+-] sqrt(number[/number])
    double parse_real(Token tok, std::size_t line) const {
        std::string_view s = tok.text;
        double sign = 1.0;
        if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
            sign = s[0] == '-' ? -1.0 : 1.0;
            s.remove_prefix(1);
        }
        double value = 0.0;
        if (s.starts_with("sqrt(") && s.ends_with(")")) {
            std::string_view inner = s.substr(5, s.size() - 6);
            const auto slash = inner.find('/');
            double radicand = parse_number({inner.substr(0, slash), tok.column}, line);
            if (slash != std::string_view::npos) {
                const double denom = parse_number({inner.substr(slash + 1), tok.column}, line);
                if (denom == 0.0) {
                    fail("division by zero", line, tok.column);
                }
                radicand /= denom;
            }
            if (radicand < 0.0) {
                fail("sqrt of a negative number", line, tok.column);
            }
            value = std::sqrt(radicand);
        } else {
            value = parse_number({s, tok.column}, line);
        }
        if (!std::isfinite(value)) {
            fail("value is not finite", line, tok.column);
        }
        return sign * value;
    }

    Amplitude parse_amplitude(const std::vector<Token>& values, std::size_t line,
                              std::size_t column) const {
        if (values.empty() || values.size() > 2) {
            fail("expected 're [im]'", line, column);
        }
        const double re = parse_real(values[0], line);
        const double im = values.size() == 2 ? parse_real(values[1], line) : 0.0;
        return {re, im};
    }

    void parse_line(std::string_view raw, std::size_t line) {
        std::string_view content = raw;
        if (auto hash = content.find('#'); hash != std::string_view::npos) {
            content = content.substr(0, hash);
        }
        if (!content.empty() && content.back() == '\r') {
            content.remove_suffix(1);
        }
        const auto first = content.find_first_not_of(" \t");
        if (first == std::string_view::npos) {
            return;
        }
        const std::size_t column = first + 1;
        std::string_view body = content.substr(first);
        while (!body.empty() && (body.back() == ' ' || body.back() == '\t')) {
            body.remove_suffix(1);
        }
        if (body.front() == '[') {
            if (body.back() != ']') {
                fail("unterminated section header", line, column);
            }
            section_ = std::string(body.substr(1, body.size() - 2));
            static const std::set<std::string> known{"scenario", "arms",   "paths",  "overrides",
                                                     "markers",  "meters", "options"};
            if (!known.contains(section_)) {
                fail("unknown section '" + section_ + "'", line, column);
            }
            return;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            fail("expected 'key = value'", line, column);
        }
        if (section_.empty()) {
            fail("entry outside of any section", line, column);
        }
        auto key_tokens = split_ws(body.substr(0, eq), first);
        if (key_tokens.size() != 1) {
            fail("expected a single key before '='", line, column);
        }
        const Token key = key_tokens[0];
        const std::string_view value_text = body.substr(eq + 1);
        const auto values = split_ws(value_text, first + eq + 1);
        const std::size_t value_column = values.empty() ? first + eq + 2 : values[0].column;

        if (section_ == "scenario") {
            if (key.text != "name" || values.size() != 1) {
                fail("expected 'name = <identifier>'", line, key.column);
            }
            spec_.name = std::string(values[0].text);
        } else if (section_ == "arms") {
            if (!is_identifier(key.text)) {
                fail("invalid arm label '" + std::string(key.text) + "'", line, key.column);
            }
            for (const auto& a : spec_.arms) {
                if (a.label == key.text) {
                    fail("duplicate arm '" + a.label + "'", line, key.column);
                }
            }
            spec_.arms.push_back({std::string(key.text), parse_amplitude(values, line, value_column)});
        } else if (section_ == "paths") {
            const int id = parse_path_id(key, line);
            for (const auto& p : spec_.paths) {
                if (p.index == id) {
                    fail("duplicate path " + std::to_string(id), line, key.column);
                }
            }
            if (values.empty()) {
                fail("path " + std::to_string(id) + " has no arms", line, value_column);
            }
            PathSpec path{id, {}, std::nullopt};
            for (const auto& tok : values) {
                path.arms.emplace_back(tok.text);
                arm_refs_.push_back({std::string(tok.text), line, tok.column});
            }
            spec_.paths.push_back(std::move(path));
        } else if (section_ == "overrides") {
            const int id = parse_path_id(key, line);
            if (overrides_.contains(id)) {
                fail("duplicate override for path " + std::to_string(id), line, key.column);
            }
            overrides_[id] = {parse_amplitude(values, line, value_column), {"", line, key.column}};
        } else if (section_ == "markers") {
            parse_marker(key, values, line, value_column);
        } else if (section_ == "meters") {
            if (values.empty()) {
                fail("meter needs at least one pointer width", line, value_column);
            }
            for (const auto& tok : values) {
                const double w = parse_real(tok, line);
                if (!(w > 0.0)) {
                    fail("pointer width must be positive", line, tok.column);
                }
                spec_.meters.push_back({std::string(key.text), w});
            }
            arm_refs_.push_back({std::string(key.text), line, key.column});
        } else if (section_ == "options") {
            parse_option(key, values, line, value_column);
        }
    }

    int parse_path_id(Token key, std::size_t line) const {
        int id = 0;
        auto [ptr, ec] = std::from_chars(key.text.data(), key.text.data() + key.text.size(), id);
        if (ec != std::errc() || ptr != key.text.data() + key.text.size()) {
            fail("path id must be an integer", line, key.column);
        }
        return id;
    }

    void parse_marker(Token key, const std::vector<Token>& values, std::size_t line,
                      std::size_t value_column) {
        for (const auto& m : spec_.markers) {
            if (m.arm == key.text) {
                fail("duplicate marker on arm '" + m.arm + "'", line, key.column);
            }
        }
        std::optional<double> eps, k, omega;
        for (const auto& tok : values) {
            const auto eq = tok.text.find('=');
            if (eq == std::string_view::npos) {
                fail("expected 'epsilon=<x>' or 'k=<x> omega=<y>'", line, tok.column);
            }
            const std::string_view name = tok.text.substr(0, eq);
            const Token value{tok.text.substr(eq + 1), tok.column + eq + 1};
            std::optional<double>* slot = name == "epsilon" ? &eps
                                          : name == "k"     ? &k
                                          : name == "omega" ? &omega
                                                            : nullptr;
            if (slot == nullptr) {
                fail("unknown marker parameter '" + std::string(name) + "'", line, tok.column);
            }
            if (slot->has_value()) {
                fail("repeated marker parameter '" + std::string(name) + "'", line, tok.column);
            }
            *slot = parse_real(value, line);
        }
        if (eps && (k || omega)) {
            fail("marker on '" + std::string(key.text) +
                     "' gives both epsilon and (k, omega); use one parametrization",
                 line, value_column);
        }
        MarkerSpec marker{std::string(key.text), 0.0};
        if (eps) {
            if (!(*eps >= 0.0 && *eps <= 1.0)) {
                fail("epsilon must lie in [0, 1]", line, value_column);
            }
            marker.coupling = *eps;
        } else if (k && omega) {
            if (!(*k > 0.0) || !(*omega >= 0.0)) {
                fail("barrier needs k > 0 and omega >= 0", line, value_column);
            }
            marker.coupling = BarrierParams{*k, *omega};
        } else {
            fail("marker needs 'epsilon=<x>' or both 'k=<x>' and 'omega=<y>'", line, value_column);
        }
        arm_refs_.push_back({marker.arm, line, key.column});
        spec_.markers.push_back(std::move(marker));
    }

    void parse_option(Token key, const std::vector<Token>& values, std::size_t line,
                      std::size_t value_column) {
        if (values.size() != 1) {
            fail("option takes exactly one value", line, value_column);
        }
        const Token v = values[0];
        if (key.text == "renormalize") {
            if (v.text == "true") {
                spec_.options.renormalize = true;
            } else if (v.text == "false") {
                spec_.options.renormalize = false;
            } else {
                fail("expected true or false", line, v.column);
            }
        } else if (key.text == "smear_width") {
            const double w = parse_real(v, line);
            if (!(w > 0.0)) {
                fail("smear_width must be positive", line, v.column);
            }
            spec_.options.smear_width = w;
        } else if (key.text == "output_grid") {
            int n = 0;
            auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), n);
            if (ec != std::errc() || ptr != v.text.data() + v.text.size() || n < 2) {
                fail("output_grid must be an integer >= 2", line, v.column);
            }
            spec_.options.output_grid = n;
        } else {
            fail("unknown option '" + std::string(key.text) + "'", line, key.column);
        }
    }

    void resolve() {
        if (spec_.paths.empty()) {
            throw spec_error("no paths defined");
        }
        std::set<std::string> arms;
        for (const auto& a : spec_.arms) {
            arms.insert(a.label);
        }
        for (const auto& ref : arm_refs_) {
            if (!arms.contains(ref.what)) {
                fail("unknown arm '" + ref.what + "'", ref.line, ref.column);
            }
        }
        for (const auto& [id, entry] : overrides_) {
            auto it = std::find_if(spec_.paths.begin(), spec_.paths.end(),
                                   [&](const PathSpec& p) { return p.index == id; });
            if (it == spec_.paths.end()) {
                fail("override for unknown path " + std::to_string(id), entry.second.line,
                     entry.second.column);
            }
            it->override_amplitude = entry.first;
        }
        try {
            to_network(spec_);
        } catch (const domain_error& e) {
            throw spec_error(e.what());
        }
    }

    std::string_view text_;
    std::string section_;
    ScenarioSpec spec_;
    std::vector<Ref> arm_refs_;
    std::map<int, std::pair<Amplitude, Ref>> overrides_;
};

} // namespace detail

/// Parse the line-oriented scenario format (see docs/formats.md).
inline ScenarioSpec parse_scenario(std::string_view text) {
    return detail::ScenarioParser(text).parse();
}

/// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const ScenarioSpec& spec) {
    using detail::format_amplitude;
    using detail::format_real;
    std::ostringstream out;
    if (!spec.name.empty()) {
        out << "[scenario]\nname = " << spec.name << "\n\n";
    }
    out << "[arms]\n";
    for (const auto& a : spec.arms) {
        out << a.label << " = " << format_amplitude(a.amplitude) << "\n";
    }
    out << "\n[paths]\n";
    bool any_override = false;
    for (const auto& p : spec.paths) {
        out << p.index << " =";
        for (const auto& arm : p.arms) {
            out << " " << arm;
        }
        out << "\n";
        any_override = any_override || p.override_amplitude.has_value();
    }
    if (any_override) {
        out << "\n[overrides]\n";
        for (const auto& p : spec.paths) {
            if (p.override_amplitude) {
                out << p.index << " = " << format_amplitude(*p.override_amplitude) << "\n";
            }
        }
    }
    if (!spec.markers.empty()) {
        out << "\n[markers]\n";
        for (const auto& m : spec.markers) {
            out << m.arm << " = ";
            if (const auto* eps = std::get_if<double>(&m.coupling)) {
                out << "epsilon=" << format_real(*eps);
            } else {
                const auto& b = std::get<BarrierParams>(m.coupling);
                out << "k=" << format_real(b.k) << " omega=" << format_real(b.omega);
            }
            out << "\n";
        }
    }
    if (!spec.meters.empty()) {
        out << "\n[meters]\n";
        for (const auto& m : spec.meters) {
            out << m.arm << " = " << format_real(m.delta_f) << "\n";
        }
    }
    out << "\n[options]\n"
        << "renormalize = " << (spec.options.renormalize ? "true" : "false") << "\n"
        << "smear_width = " << format_real(spec.options.smear_width) << "\n"
        << "output_grid = " << spec.options.output_grid << "\n";
    return out.str();
}

inline ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw spec_error("cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

/// 64-bit FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string scenario_fingerprint(const ScenarioSpec& spec) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_scenario(spec)) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

/// The nested interferometer with marks at A, B, C, E, F and eps = 0.05.
inline constexpr std::string_view builtin_nested_mzi = R"(# Nested Mach-Zehnder interferometer.
# Paths reaching the detector: 1 = E A F, 2 = E B F, 3 = C.
# Tuned so A[1] = -A[2] and the inner loop cancels at the detector.

[scenario]
name = nested_mzi

[arms]
E = 1
A = sqrt(1/12)
B = -sqrt(1/12)
F = 1
C = sqrt(1/6)

[paths]
1 = E A F
2 = E B F
3 = C

[markers]
A = epsilon=0.05
B = epsilon=0.05
C = epsilon=0.05
E = epsilon=0.05
F = epsilon=0.05

[meters]
A = 0.01 1000
B = 0.01 1000
C = 0.01 1000
E = 0.01 1000
F = 0.01 1000

[options]
renormalize = false
smear_width = 0.15
output_grid = 601
)";

inline ScenarioSpec builtin_scenario() { return parse_scenario(builtin_nested_mzi); }

} // namespace mzitrace

#endif // MZITRACE_SCENARIO_HPP
