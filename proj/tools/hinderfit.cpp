// hinderfit command line: trend gates, fitting ladder, forecasts, kernel
// evaluation and synthetic data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hinderfit/error.hpp"
#include "hinderfit/fit.hpp"
#include "hinderfit/forecast.hpp"
#include "hinderfit/io.hpp"
#include "hinderfit/kernel.hpp"
#include "hinderfit/trend.hpp"

namespace {

using namespace hinderfit;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;

int report_error(std::string_view code, const std::string& message)
{
    json err{{"error", std::string(code)}, {"message", message}};
    std::cout << dump_canonical(err) << "\n";
    return kExitInvalid;
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(Errc::IoError, "cannot write " + path);
    }
    out << contents;
    if (!out) {
        fail(Errc::IoError, "write failed for " + path);
    }
}

// "1:0.5,8:0.5" -> {1: 0.5, 8: 0.5}, renormalized.
HinderingWeights parse_weights(const std::string& text)
{
    std::map<int, double> terms;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            fail(Errc::InvalidArgument, "weights must look like 1:0.5,8:0.5");
        }
        try {
            terms[std::stoi(item.substr(0, colon))] = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
            fail(Errc::InvalidArgument, "bad weight entry '" + item + "'");
        }
    }
    return HinderingWeights::normalized(std::move(terms));
}

GrowthFamily make_family(const std::string& name, int k, const std::string& weights)
{
    if (name == "sth") {
        return SingleTerm{k};
    }
    if (name == "logistic") {
        return Logistic{};
    }
    if (name == "exp" || name == "exponential") {
        return Exponential{};
    }
    if (name == "multi") {
        if (weights.empty()) {
            fail(Errc::InvalidArgument, "--family multi needs --weights");
        }
        return MultiTerm{parse_weights(weights)};
    }
    fail(Errc::UnsupportedFamily, "unknown family '" + name + "'");
}

struct TrendArgs {
    std::string csv;
    double alpha = 0.05;
    std::string on = "q";
    std::string t_col = "t";
    std::string q_col = "Q";
};

int run_trend(const TrendArgs& args)
{
    const Dataset data = load_csv(args.csv, {args.t_col, args.q_col});
    json out;
    out["alpha"] = args.alpha;
    out["on"] = args.on;
    TrendResult result;
    if (args.on == "q") {
        result = mk_test(data.series, TrendDirection::Increasing);
    } else {
        const RateSeries rates = growth_rates(data.series);
        result = mk_test(rates.g, TrendDirection::Decreasing);
    }
    out["trend"] = trend_to_json(result);
    out["pass"] = result.p_one_tailed < args.alpha;
    std::cout << dump_canonical(out) << "\n";
    return kExitOk;
}

struct FitArgs {
    std::string csv;
    int k_max = 12;
    int max_terms = 3;
    double alpha = 0.05;
    std::vector<std::string> families{"sth", "logistic", "multi"};
    std::string t_col = "t";
    std::string q_col = "Q";
    std::string out;
    std::string curves;
    int grid = 500;
    bool override_gates = false;
};

int run_fit(const FitArgs& args)
{
    const Dataset data = load_csv(args.csv, {args.t_col, args.q_col});
    PipelineOptions options;
    options.alpha = args.alpha;
    options.k_max = args.k_max;
    options.max_terms = args.max_terms;
    options.use_sth = options.use_logistic = options.use_multi = false;
    for (const auto& name : args.families) {
        if (name == "sth") {
            options.use_sth = true;
        } else if (name == "logistic") {
            options.use_logistic = true;
        } else if (name == "multi") {
            options.use_multi = true;
        } else {
            fail(Errc::InvalidArgument, "unknown family '" + name + "' in --families");
        }
    }
    if (!options.use_sth && !options.use_logistic) {
        fail(Errc::InvalidArgument, "--families needs sth or logistic");
    }
    options.override_gates = args.override_gates;

    const LadderReport ladder = run_ladder(data.series, options);
    const std::string report = emit_report_json(build_report(data, ladder));
    if (args.out.empty()) {
        std::cout << report;
    } else {
        write_file(args.out, report);
    }
    if (!args.curves.empty()) {
        const auto grid = uniform_grid(data.series.t_front(), data.series.t_back(), args.grid);
        write_file(args.curves, emit_curves_csv(ladder.chosen.model, grid, &data.series));
    }
    return kExitOk;
}

int run_forecast(const std::string& report_path, double to, double step)
{
    std::ifstream in(report_path, std::ios::binary);
    if (!in) {
        fail(Errc::IoError, "cannot open " + report_path);
    }
    json report;
    try {
        report = json::parse(in);
    } catch (const json::exception& e) {
        fail(Errc::ParseError, std::string("report is not valid JSON: ") + e.what());
    }
    GrowthModel model;
    double t_max = 0.0;
    try {
        if (report.at("schema").get<std::string>() != kReportSchema) {
            fail(Errc::ParseError, "unsupported report schema");
        }
        model = model_from_json(report.at("chosen"));
        t_max = report.at("input").at("t_max").get<double>();
    } catch (const json::exception& e) {
        fail(Errc::ParseError, std::string("malformed report: ") + e.what());
    }
    if (!(to > t_max)) {
        fail(Errc::InvalidArgument, "--to must lie beyond the last observation " + format_number(t_max));
    }
    if (step <= 0.0) {
        step = (to - t_max) / 20.0;
    }
    std::cout << emit_forecast_csv(forecast_range(model, t_max, to, step));
    return kExitOk;
}

int run_eval(const std::string& family_name_arg, int k, const std::string& weights, double x)
{
    const GrowthFamily family = make_family(family_name_arg, k, weights);
    const double h = h_of_x(family, x);
    json out;
    out["family"] = family_label(family);
    out["x"] = x;
    out["h"] = h;
    out["dh_dx"] = dh_dx(family, h);
    out["g_factor"] = growth_rate_factor(family, h);
    out["f"] = f_transform(family, h);
    out["asymmetry"] = asymmetry(family, x);
    std::cout << dump_canonical(out) << "\n";
    return kExitOk;
}

struct SynthArgs {
    std::string family = "sth";
    int k = 1;
    std::string weights;
    double g_u = 1.0;
    double q_h = 1.0;
    double t_h = 0.0;
    double t0 = 0.0;
    double t1 = 1.0;
    int n = 100;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& args)
{
    SynthConfig config;
    config.model = GrowthModel{make_family(args.family, args.k, args.weights), args.g_u, args.q_h, args.t_h};
    config.model.validate();
    config.t0 = args.t0;
    config.t1 = args.t1;
    config.n = args.n;
    config.sigma = args.sigma;
    config.seed = args.seed;
    std::cout << format_series_csv(synth_generate(config).series);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hinderfit: hindered growth models for time series"};
    app.require_subcommand(1);

    TrendArgs trend;
    auto* trend_cmd = app.add_subcommand("trend", "Mann-Kendall gate on Q (increasing) or g (decreasing)");
    trend_cmd->add_option("csv", trend.csv, "input CSV")->required();
    trend_cmd->add_option("--alpha", trend.alpha, "significance level")->check(CLI::Range(1e-12, 0.5));
    trend_cmd->add_option("--on", trend.on, "series to test")->check(CLI::IsMember({"q", "g"}));
    trend_cmd->add_option("--t-col", trend.t_col, "time column name");
    trend_cmd->add_option("--q-col", trend.q_col, "quantity column name");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "gated model selection ladder");
    fit_cmd->add_option("csv", fit.csv, "input CSV")->required();
    fit_cmd->add_option("--k-max", fit.k_max, "largest single-term order")->check(CLI::Range(1, kMaxOrder));
    fit_cmd->add_option("--max-terms", fit.max_terms, "most hindering terms")->check(CLI::Range(1, 6));
    fit_cmd->add_option("--alpha", fit.alpha, "significance level")->check(CLI::Range(1e-12, 0.5));
    fit_cmd->add_option("--families", fit.families, "comma list of sth,logistic,multi")->delimiter(',');
    fit_cmd->add_option("--t-col", fit.t_col, "time column name");
    fit_cmd->add_option("--q-col", fit.q_col, "quantity column name");
    fit_cmd->add_option("--out", fit.out, "report JSON path (stdout if omitted)");
    fit_cmd->add_option("--curves", fit.curves, "curves CSV path");
    fit_cmd->add_option("--grid", fit.grid, "curve grid points")->check(CLI::Range(2, 1000000));
    fit_cmd->add_flag("--override-gates", fit.override_gates, "fit even when the trend gates fail");

    std::string report_path;
    double to = 0.0;
    double step = 0.0;
    auto* forecast_cmd = app.add_subcommand("forecast", "forecast table from a fit report");
    forecast_cmd->add_option("report", report_path, "report JSON")->required();
    forecast_cmd->add_option("--to", to, "last forecast time")->required();
    forecast_cmd->add_option("--step", step, "time step (default: 20 steps)");

    std::string eval_family;
    int eval_k = 1;
    std::string eval_weights;
    double eval_x = 0.0;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate the growth kernel at x");
    eval_cmd->add_option("--family", eval_family, "sth, logistic, exp or multi")->required();
    eval_cmd->add_option("--k", eval_k, "order for sth");
    eval_cmd->add_option("--weights", eval_weights, "orders and weights for multi, e.g. 1:0.5,8:0.5");
    eval_cmd->add_option("--x", eval_x, "dimensionless time")->required();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "synthetic series with log-normal noise");
    synth_cmd->add_option("--family", synth.family, "sth, logistic, exp or multi");
    synth_cmd->add_option("--k", synth.k, "order for sth");
    synth_cmd->add_option("--weights", synth.weights, "orders and weights for multi");
    synth_cmd->add_option("--gu", synth.g_u, "unhindered rate")->required();
    synth_cmd->add_option("--qh", synth.q_h, "hindering scale")->required();
    synth_cmd->add_option("--th", synth.t_h, "time at which Q = Q_h")->required();
    synth_cmd->add_option("--t0", synth.t0, "first time")->required();
    synth_cmd->add_option("--t1", synth.t1, "last time")->required();
    synth_cmd->add_option("--n", synth.n, "points")->required();
    synth_cmd->add_option("--sigma", synth.sigma, "relative noise");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("InvalidArgument", e.what());
    }

    try {
        if (*trend_cmd) {
            return run_trend(trend);
        }
        if (*fit_cmd) {
            return run_fit(fit);
        }
        if (*forecast_cmd) {
            return run_forecast(report_path, to, step);
        }
        if (*eval_cmd) {
            return run_eval(eval_family, eval_k, eval_weights, eval_x);
        }
        if (*synth_cmd) {
            return run_synth(synth);
        }
    } catch (const Error& e) {
        return report_error(to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
