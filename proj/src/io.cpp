#include "hyst/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hyst/errors.hpp"

namespace hyst {

namespace {

[[noreturn]] void bad(const std::string& what) { throw BadInput(what); }

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, const std::string& where) {
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) bad(where + ": trailing characters in number '" + tok + "'");
        return v;
    } catch (const BadInput&) {
        throw;
    } catch (const std::exception&) {
        bad(where + ": expected a number, got '" + tok + "'");
    }
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream is(line);
    std::string t;
    while (is >> t) toks.push_back(t);
    return toks;
}

std::string curve_spec(const MonotoneCurve& c) {
    std::ostringstream os;
    switch (c.kind()) {
        case MonotoneCurve::Kind::Identity: os << "identity"; break;
        case MonotoneCurve::Kind::AffineShift: os << "affine " << fmt17(c.shift()); break;
        case MonotoneCurve::Kind::PiecewiseLinear:
            os << "piecewise";
            for (const CurvePoint& p : c.points()) os << ' ' << fmt17(p.x) << ' ' << fmt17(p.y);
            break;
        case MonotoneCurve::Kind::Langmuir:
            os << "langmuir " << fmt17(c.langmuir_V()) << ' ' << fmt17(c.langmuir_B());
            break;
        case MonotoneCurve::Kind::ClosedForm: os << "closedform " << c.name(); break;
    }
    return os.str();
}

MonotoneCurve parse_curve_spec(const std::vector<std::string>& toks, std::size_t from,
                               const std::string& where) {
    if (from >= toks.size()) bad(where + ": missing curve spec");
    const std::string& head = toks[from];
    std::size_t argc = toks.size() - from - 1;
    if (head == "identity") {
        if (argc != 0) bad(where + ": identity curve takes no arguments");
        return MonotoneCurve::identity();
    }
    if (head == "affine") {
        if (argc != 1) bad(where + ": affine curve takes one shift");
        return MonotoneCurve::affine_shift(parse_double(toks[from + 1], where));
    }
    if (head == "piecewise") {
        if (argc < 4 || argc % 2 != 0) bad(where + ": piecewise curve takes x y pairs");
        std::vector<CurvePoint> pts;
        for (std::size_t i = from + 1; i < toks.size(); i += 2)
            pts.push_back({parse_double(toks[i], where), parse_double(toks[i + 1], where)});
        return MonotoneCurve::piecewise_linear(std::move(pts));
    }
    if (head == "langmuir") {
        if (argc != 2) bad(where + ": langmuir curve takes V and B");
        return MonotoneCurve::langmuir(parse_double(toks[from + 1], where),
                                       parse_double(toks[from + 2], where));
    }
    if (head == "closedform") {
        if (argc != 1) bad(where + ": closedform curve takes a name");
        return MonotoneCurve::closed_form(toks[from + 1]);
    }
    bad(where + ": unknown curve spec '" + head + "'");
}

std::string trunc_spec(const Truncation& b) {
    std::ostringstream os;
    switch (b.kind()) {
        case Truncation::Kind::Identity: os << "identity"; break;
        case Truncation::Kind::Ramp: os << "ramp " << fmt17(b.h()); break;
        case Truncation::Kind::ScaledRamp:
            os << "scaledramp " << fmt17(b.h()) << ' ' << fmt17(b.eps());
            break;
        case Truncation::Kind::Heaviside: os << "heaviside " << fmt17(b.h()); break;
        case Truncation::Kind::SmoothErf: os << "smootherf " << fmt17(b.h()); break;
    }
    return os.str();
}

Truncation parse_trunc_spec(const std::vector<std::string>& toks, std::size_t from,
                            const std::string& where) {
    if (from >= toks.size()) bad(where + ": missing truncation spec");
    const std::string& head = toks[from];
    std::size_t argc = toks.size() - from - 1;
    auto arg = [&](std::size_t i) { return parse_double(toks[from + 1 + i], where); };
    if (head == "identity") {
        if (argc != 0) bad(where + ": identity truncation takes no arguments");
        return Truncation::identity();
    }
    if (head == "ramp") {
        if (argc != 1) bad(where + ": ramp takes a height");
        return Truncation::ramp(arg(0));
    }
    if (head == "scaledramp") {
        if (argc != 2) bad(where + ": scaledramp takes height and rise");
        return Truncation::scaled_ramp(arg(0), arg(1));
    }
    if (head == "heaviside") {
        if (argc != 1) bad(where + ": heaviside takes a height");
        return Truncation::heaviside(arg(0));
    }
    if (head == "smootherf") {
        if (argc != 1) bad(where + ": smootherf takes a height");
        return Truncation::smooth_erf(arg(0));
    }
    bad(where + ": unknown truncation spec '" + head + "'");
}

}  // namespace

std::string serialize_model(const Model& m) {
    std::ostringstream os;
    os << "hystmodel 1\n";
    os << "kind " << kind_label(m.kind()) << "\n";
    os << "K " << m.size() << "\n";
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Hysteron& h = m[k];
        if (h.affine()) {
            os << "hysteron " << fmt17(h.mu) << ' ' << fmt17(h.alpha()) << ' '
               << fmt17(h.beta()) << ' ' << trunc_spec(h.trunc) << "\n";
        } else {
            os << "hysteron " << fmt17(h.mu) << " curves " << trunc_spec(h.trunc) << "\n";
            os << "left " << curve_spec(h.left) << "\n";
            os << "right " << curve_spec(h.right) << "\n";
        }
    }
    return os.str();
}

Model parse_model(std::istream& in) {
    std::vector<std::vector<std::string>> lines;
    std::string raw;
    while (std::getline(in, raw)) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        lines.push_back(split_ws(line));
    }
    std::size_t at = 0;
    auto next = [&](const std::string& want) -> const std::vector<std::string>& {
        if (at >= lines.size()) bad("model file ended early, expected '" + want + "'");
        if (lines[at][0] != want)
            bad("model file: expected '" + want + "', got '" + lines[at][0] + "'");
        return lines[at++];
    };

    const auto& magic = next("hystmodel");
    if (magic.size() != 2 || magic[1] != "1") bad("model file: unsupported version");
    const auto& kind_line = next("kind");
    if (kind_line.size() != 2) bad("model file: kind line takes one word");
    ModelKind kind = kind_from_label(kind_line[1]);
    const auto& count_line = next("K");
    if (count_line.size() != 2) bad("model file: K line takes one count");
    long long K = static_cast<long long>(parse_double(count_line[1], "model file K"));
    if (K < 1) bad("model file: K must be at least 1");

    std::vector<Hysteron> rows;
    rows.reserve(K);
    for (long long k = 0; k < K; ++k) {
        std::ostringstream whs;
        whs << "hysteron " << k;
        std::string where = whs.str();
        const auto& toks = next("hysteron");
        if (toks.size() < 3) bad(where + ": too few fields");
        double mu = parse_double(toks[1], where);
        if (toks[2] == "curves") {
            Truncation b = parse_trunc_spec(toks, 3, where);
            const auto& lhs = next("left");
            MonotoneCurve left = parse_curve_spec(lhs, 1, where + " left");
            const auto& rhs = next("right");
            MonotoneCurve right = parse_curve_spec(rhs, 1, where + " right");
            rows.push_back(Hysteron::curve_pair(mu, std::move(left), std::move(right), b));
        } else {
            double alpha = parse_double(toks[2], where);
            if (toks.size() < 4) bad(where + ": missing beta");
            double beta = parse_double(toks[3], where);
            rows.push_back(Hysteron::unit(mu, alpha, beta, parse_trunc_spec(toks, 4, where)));
        }
    }
    if (at != lines.size()) bad("model file: trailing content after the last hysteron");
    return Model(kind, std::move(rows));
}

Model parse_model_string(const std::string& text) {
    std::istringstream is(text);
    return parse_model(is);
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open model file '" + path + "'");
    return parse_model(in);
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) bad("cannot write model file '" + path + "'");
    out << serialize_model(m);
    if (!out.flush()) bad("failed writing model file '" + path + "'");
}

MonotoneCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open curve file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "u,w")
        bad("curve file '" + path + "' must start with header 'u,w'");
    std::vector<CurvePoint> pts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        std::size_t comma = t.find(',');
        std::ostringstream whs;
        whs << path << " line " << lineno;
        if (comma == std::string::npos) bad(whs.str() + ": expected 'u,w'");
        double u = parse_double(trim(t.substr(0, comma)), whs.str());
        double w = parse_double(trim(t.substr(comma + 1)), whs.str());
        if (!pts.empty() && u <= pts.back().x)
            bad(whs.str() + ": u values must be strictly increasing");
        pts.push_back({u, w});
    }
    if (pts.size() < 2) bad("curve file '" + path + "' needs at least two rows");
    return MonotoneCurve::piecewise_linear(std::move(pts));
}

Config parse_config(std::istream& in) {
    Config cfg;
    std::string section;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') bad("config: unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) bad("config: empty section name");
            cfg[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config line " << lineno << ": expected key = value";
            bad(os.str());
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) bad("config: empty key");
        auto [it, fresh] = cfg[section].emplace(key, value);
        if (!fresh) bad("config: duplicate key '" + key + "'");
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string fmt17(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

std::string fmt6(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) bad("cannot write '" + path + "'");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out.flush()) bad("failed writing '" + path + "'");
}

}  // namespace hyst
