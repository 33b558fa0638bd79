#include "msarch/io.hpp"

#include "msarch/errors.hpp"

#include "json.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace msarch {

namespace {

using ojson = nlohmann::ordered_json;

std::string trim(std::string s) {
    auto blank = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), blank));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), blank).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t k : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    const int y = std::stoi(s.substr(0, 4));
    const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
    return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

long line_of_byte(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte, text.size());
    return 1 + static_cast<long>(std::count(text.begin(), text.begin() + static_cast<long>(end), '\n'));
}

double require_number(const ojson& j, const char* key, const std::string& text) {
    if (!j.contains(key)) throw ParseError(std::string("missing key \"") + key + "\"", line_of_byte(text, text.size()));
    if (!j[key].is_number()) throw ParseError(std::string("\"") + key + "\" must be a number", 1);
    return j[key].get<double>();
}

}  // namespace

std::vector<PriceRow> read_prices_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError("empty price file", 1);
    const auto head = split(lines[0]);
    if (head.size() != 2) throw ParseError("expected two columns (date, close)", 1);
    if (is_iso_date(head[0]) && parse_number(head[1])) throw ParseError("missing header row", 1);
    std::vector<PriceRow> rows;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const long line = static_cast<long>(k + 1);
        const auto cells = split(lines[k]);
        if (cells.size() != 2) throw ParseError("expected two columns, found " + std::to_string(cells.size()), line);
        if (!is_iso_date(cells[0])) throw ParseError("malformed date \"" + cells[0] + "\"", line);
        const auto close = parse_number(cells[1]);
        if (!close || !std::isfinite(*close)) throw ParseError("malformed close \"" + cells[1] + "\"", line);
        if (*close <= 0.0) throw NonPositivePrice("line " + std::to_string(line) + ": close must be positive");
        rows.push_back({cells[0], *close});
    }
    if (rows.size() < 2) throw ParseError("need at least two prices", static_cast<long>(lines.size()));
    return rows;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw PreconditionViolation("row width differs from the header");
    rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("no column named \"" + name + "\"", 1);
    return static_cast<std::size_t>(it - header.begin());
}

Table read_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError("empty file " + path.string(), 1);
    Table t;
    t.header = split(lines[0]);
    for (std::size_t k = 1; k < lines.size(); ++k) {
        auto cells = split(lines[k]);
        if (cells.size() != t.header.size())
            throw ParseError("expected " + std::to_string(t.header.size()) + " columns, found " +
                                 std::to_string(cells.size()),
                             static_cast<long>(k + 1));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw IoError("write failure on " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into " + path.string());
    }
}

void write_csv(const std::filesystem::path& path, const Table& table) {
    std::string text;
    auto put = [&](const std::vector<std::string>& row) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) text += ',';
            text += row[k];
        }
        text += '\n';
    };
    put(table.header);
    for (const auto& r : table.rows) put(r);
    write_text_atomic(path, text);
}

std::vector<double> read_series(const std::filesystem::path& path, const std::string& name) {
    const Table t = read_csv(path);
    const std::size_t col = t.header.size() == 1 ? 0 : t.column(name);
    std::vector<double> v;
    v.reserve(t.rows.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto x = parse_number(t.rows[k][col]);
        if (!x || !std::isfinite(*x))
            throw ParseError("malformed value \"" + t.rows[k][col] + "\"", static_cast<long>(k + 2));
        v.push_back(*x);
    }
    return v;
}

ModelParams ParamsDocument::params() const {
    ModelParams p;
    p.D = D;
    p.nu = nu;
    p.M = M;
    if (kind == ModelKind::Complete) {
        if (!alpha || !beta) throw PreconditionViolation("complete model needs alpha and beta");
        p.mixture = InverseGamma{*alpha, *beta};
    } else {
        if (!sigma0) throw PreconditionViolation("null model needs sigma0");
        p.mixture = PointVol{*sigma0};
    }
    p.validate();
    return p;
}

ParamsDocument ParamsDocument::from(const ModelParams& p) {
    ParamsDocument d;
    d.D = p.D;
    d.nu = p.nu;
    d.M = p.M;
    if (const auto* ig = std::get_if<InverseGamma>(&p.mixture)) {
        d.kind = ModelKind::Complete;
        d.alpha = ig->alpha;
        d.beta = ig->beta;
    } else {
        d.kind = ModelKind::Null;
        d.sigma0 = std::get<PointVol>(p.mixture).sigma0;
    }
    return d;
}

ParamsDocument ParamsDocument::from(const CalibrationResult& r, int M) {
    ParamsDocument d;
    d.kind = r.kind;
    d.D = r.theta_hat.D;
    d.nu = r.theta_hat.nu;
    d.M = M;
    if (r.kind == ModelKind::Complete) {
        d.alpha = r.theta_hat.alpha;
        d.beta = r.scale;
    } else {
        d.sigma0 = r.scale;
    }
    d.objective = r.objective_value;
    d.diagnostics = {{"converged", r.converged ? 1.0 : 0.0},
                     {"evaluations", static_cast<double>(r.evaluations)},
                     {"infeasible_probes", static_cast<double>(r.infeasible_probes)}};
    return d;
}

std::string params_to_json(const ParamsDocument& d) {
    ojson j;
    j["model"] = d.kind == ModelKind::Complete ? "complete" : "null";
    j["D"] = d.D;
    j["nu"] = d.nu;
    if (d.alpha) j["alpha"] = *d.alpha;
    if (d.beta) j["beta"] = *d.beta;
    if (d.sigma0) j["sigma0"] = *d.sigma0;
    j["M"] = d.M;
    if (d.objective) j["objective"] = *d.objective;
    ojson diag = ojson::object();
    for (const auto& [k, v] : d.diagnostics) diag[k] = v;
    j["diagnostics"] = diag;
    return j.dump(2) + "\n";
}

ParamsDocument params_from_json(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid parameter document: ") + e.what(), line_of_byte(text, e.byte));
    }
    if (!j.is_object()) throw ParseError("parameter document must be an object", 1);
    static const std::vector<std::string> known{"model", "D",     "nu",        "alpha",      "beta",
                                                "sigma0", "M",    "objective", "diagnostics"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ParseError("unknown key \"" + k + "\"", 1);
    ParamsDocument d;
    if (!j.contains("model") || !j["model"].is_string()) throw ParseError("missing \"model\"", 1);
    const std::string model = j["model"].get<std::string>();
    if (model == "complete")
        d.kind = ModelKind::Complete;
    else if (model == "null")
        d.kind = ModelKind::Null;
    else
        throw ParseError("model must be \"complete\" or \"null\"", 1);
    d.D = require_number(j, "D", text);
    d.nu = require_number(j, "nu", text);
    if (!j.contains("M") || !j["M"].is_number_integer()) throw ParseError("\"M\" must be an integer", 1);
    d.M = j["M"].get<int>();
    for (auto [key, slot] : {std::pair{"alpha", &d.alpha}, {"beta", &d.beta}, {"sigma0", &d.sigma0}, {"objective", &d.objective}})
        if (j.contains(key)) *slot = require_number(j, key, text);
    if (j.contains("diagnostics")) {
        if (!j["diagnostics"].is_object()) throw ParseError("\"diagnostics\" must be an object", 1);
        for (const auto& [k, v] : j["diagnostics"].items()) {
            if (!v.is_number()) throw ParseError("diagnostic \"" + k + "\" must be a number", 1);
            d.diagnostics.emplace_back(k, v.get<double>());
        }
    }
    if (d.kind == ModelKind::Complete && !d.alpha) throw ParseError("complete model needs \"alpha\"", 1);
    return d;
}

ParamsDocument read_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return params_from_json(s.str());
}

void write_params(const std::filesystem::path& path, const ParamsDocument& doc) {
    write_text_atomic(path, params_to_json(doc));
}

std::string summary_to_json(const SeriesSummary& s) {
    ojson j;
    j["T"] = s.T;
    j["mean_removed"] = s.mean_removed;
    j["drift"] = s.drift;
    j["std"] = s.std;
    return j.dump(2) + "\n";
}

}  // namespace msarch
