#pragma once

// Dataset ingestion, synthetic data and deterministic report / curve output.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hinderfit/fit.hpp"
#include "hinderfit/forecast.hpp"

namespace hinderfit {

inline constexpr std::string_view kReportSchema = "hinderfit/1";

struct Dataset {
    TimeSeries series;
    std::string t_unit;
    std::string q_unit;
    std::string source;
};

struct CsvColumns {
    std::string t = "t";
    std::string q = "Q";
};

/// Parses CSV text with a header row. Extra columns are ignored and rows may
/// come in any order; they are sorted by t. Errors: ParseError (with line
/// number), DuplicateTime, NonPositiveQ, TooFewRows.
Dataset parse_csv(std::string_view text, const CsvColumns& columns = {}, std::string source = "<memory>");
Dataset load_csv(const std::filesystem::path& path, const CsvColumns& columns = {});

/// "t,Q" header plus one row per point, numbers at 17 significant digits.
std::string format_series_csv(const TimeSeries& series);

/// 17 significant digits, so every double round-trips exactly.
std::string format_number(double value);

/// n points from t0 to t1 inclusive.
std::vector<double> uniform_grid(double t0, double t1, int n);

struct SynthConfig {
    GrowthModel model;
    double t0 = 0.0;
    double t1 = 1.0;
    int n = 100;
    /// Relative noise: Q_i = predict(t_i) exp(sigma eps_i).
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Standard normal deviates from std::mt19937_64 through the Box-Muller
/// cosine branch, eps = sqrt(-2 ln(1 - u1)) cos(2 pi u2) with u = 53-bit
/// uniforms in [0, 1). One deviate per pair of draws. Written out rather than
/// using std::normal_distribution so output is identical across standard
/// libraries.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed);
    double next();

private:
    std::mt19937_64 engine_;
};

Dataset synth_generate(const SynthConfig& config);

nlohmann::json family_to_json(const GrowthFamily& family);
GrowthFamily family_from_json(const nlohmann::json& value);

nlohmann::json fit_to_json(const FitResult& fit, const TimeSeries& series);
/// Reads the family and g_u, Q_h, t_h fields written by fit_to_json.
GrowthModel model_from_json(const nlohmann::json& value);

nlohmann::json trend_to_json(const TrendResult& trend);
nlohmann::json gate_to_json(const GateResult& gate);
nlohmann::json forecast_to_json(const Forecast& point);

/// Full report document (schema "hinderfit/1").
nlohmann::json build_report(const Dataset& data, const LadderReport& report);

/// Pretty-printed JSON with sorted keys and 17-significant-digit floats;
/// byte-identical for identical input.
std::string dump_canonical(const nlohmann::json& value);

std::string emit_report_json(const nlohmann::json& report);

/// Columns t,x_minus_xh,Q_model,g_model,Q_data,rel_residual. Rows are the
/// union of the grid and the data times; data columns are blank where there
/// is no observation.
std::string emit_curves_csv(const GrowthModel& model, const std::vector<double>& grid, const TimeSeries* data);

/// t,Q,g,x_minus_xh table.
std::string emit_forecast_csv(const std::vector<Forecast>& points);

} // namespace hinderfit
