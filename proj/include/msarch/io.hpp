#pragma once

#include "msarch/calibrate.hpp"
#include "msarch/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace msarch {

struct PriceRow {
    std::string date;  // ISO YYYY-MM-DD
    double close = 0.0;
};

/// Two-column CSV (date, close) with a header row.
std::vector<PriceRow> read_prices_csv(const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double; "NA" for NaN.
std::string format_double(double v);

/// Column-oriented CSV table; every column has the same length.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    /// Index of a header entry; throws ParseError if absent.
    std::size_t column(const std::string& name) const;
};

Table read_csv(const std::filesystem::path& path);
/// Writes to a temporary file next to `path` and renames it into place.
void write_csv(const std::filesystem::path& path, const Table& table);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Values of column `name` (or of the only column), NA not allowed.
std::vector<double> read_series(const std::filesystem::path& path, const std::string& name = "x");

struct SeriesSummary {
    std::size_t T = 0;
    bool mean_removed = true;
    double drift = 0.0;  // mean log return that was removed
    double std = 0.0;
};

/// Parameter document shared by calibrate, analyze and restarts.
struct ParamsDocument {
    ModelKind kind = ModelKind::Complete;
    double D = 0.5;
    double nu = 1.0;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> sigma0;
    int M = 1;
    std::optional<double> objective;
    // free-form numeric diagnostics, written in key order
    std::vector<std::pair<std::string, double>> diagnostics;

    ModelParams params() const;
    static ParamsDocument from(const ModelParams& p);
    static ParamsDocument from(const CalibrationResult& r, int M);
};

std::string params_to_json(const ParamsDocument& doc);
ParamsDocument params_from_json(const std::string& text);
ParamsDocument read_params(const std::filesystem::path& path);
void write_params(const std::filesystem::path& path, const ParamsDocument& doc);

std::string summary_to_json(const SeriesSummary& s);

}  // namespace msarch
