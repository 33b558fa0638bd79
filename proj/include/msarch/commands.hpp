#pragma once

#include "msarch/calibrate.hpp"
#include "msarch/io.hpp"
#include "msarch/rng.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace msarch {

// Command implementations behind the msarch tool. Times in emitted files are
// 1-based; NA marks undefined cells.

struct IngestConfig {
    std::filesystem::path prices;
    std::filesystem::path out;
    std::optional<std::filesystem::path> summary;  // default: <out>.summary.json
};
SeriesSummary cmd_ingest(const IngestConfig& cfg);

struct SimulateConfig {
    ModelParams params;
    std::size_t T = 0;
    SeedSpec seed;
    std::filesystem::path out;  // columns t, i, y, x
};
void cmd_simulate(const SimulateConfig& cfg);

struct CalibrateConfig {
    std::filesystem::path returns;
    ObjectiveSpec spec;
    std::filesystem::path out;
};
ParamsDocument cmd_calibrate(const CalibrateConfig& cfg);

struct AnalyzeConfig {
    std::filesystem::path returns;
    std::optional<std::filesystem::path> params;
    std::filesystem::path out_dir;
    int max_lag = 100;                                    // t range of the moment and autocorrelation tables
    std::vector<double> moment_orders{0.5, 1.0, 2.0, 3.0};
    std::vector<double> hurst_orders{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    int hurst_window = 30;
    std::vector<int> mug_grid{5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
};
/// Writes moments.csv, acf.csv, hurst.csv, histogram.csv and mugshot.csv.
std::vector<std::filesystem::path> cmd_analyze(const AnalyzeConfig& cfg);

struct RestartsConfig {
    std::filesystem::path returns;
    std::filesystem::path params;
    std::filesystem::path out_dir;
    int tau = 2;
    std::optional<int> vol_window;  // default M
    std::optional<std::filesystem::path> truth;  // simulate output with an i column
};
struct RestartsReport {
    std::size_t selected = 0;
    double threshold = 0.0;
    std::optional<double> exact_recovery;
    std::optional<double> near_recovery;  // within 2 steps
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> files;
};
/// Writes posterior.csv, restarts.csv, reconstruction.csv, volatility.csv and restarts.json.
RestartsReport cmd_restarts(const RestartsConfig& cfg);

}  // namespace msarch
