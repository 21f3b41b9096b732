#include "hinderfit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hinderfit/error.hpp"

namespace hinderfit {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

// Commas inside double quotes stay in the field, so "1,000" reaches the number
// parser whole and is rejected there.
std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i < line.size() && line[i] == '"') {
            quoted = !quoted;
        } else if (i == line.size() || (line[i] == ',' && !quoted)) {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what)
{
    fail(Errc::ParseError, "line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view field, std::size_t line)
{
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        parse_error(line, "not a number: '" + std::string(field) + "'");
    }
    return value;
}

json number_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

void dump_value(const json& value, std::string& out, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (value.type()) {
    case json::value_t::object: {
        if (value.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, item] : value.items()) {
            out += first ? "" : ",\n";
            first = false;
            out += inner + json(key).dump() + ": ";
            dump_value(item, out, indent + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    case json::value_t::array: {
        if (value.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        bool first = true;
        for (const auto& item : value) {
            out += first ? "" : ",\n";
            first = false;
            out += inner;
            dump_value(item, out, indent + 1);
        }
        out += "\n" + pad + "]";
        return;
    }
    case json::value_t::number_float: {
        const double v = value.get<double>();
        out += std::isfinite(v) ? format_number(v) : "null";
        return;
    }
    default:
        out += value.dump();
        return;
    }
}

} // namespace

Dataset parse_csv(std::string_view text, const CsvColumns& columns, std::string source)
{
    std::vector<std::pair<double, double>> rows;
    std::size_t line_no = 0;
    std::size_t t_index = 0;
    std::size_t q_index = 0;
    std::size_t width = 0;
    bool have_header = false;

    std::size_t pos = 0;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        pos = 3;
    }
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        const auto line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (!have_header) {
            auto find = [&](const std::string& name) {
                const auto it = std::find(fields.begin(), fields.end(), name);
                if (it == fields.end()) {
                    parse_error(line_no, "header has no column named '" + name + "'");
                }
                return static_cast<std::size_t>(it - fields.begin());
            };
            t_index = find(columns.t);
            q_index = find(columns.q);
            width = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() < width) {
            parse_error(line_no, "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
        }
        const double t = parse_number(fields[t_index], line_no);
        const double q = parse_number(fields[q_index], line_no);
        if (!(q > 0.0)) {
            fail(Errc::NonPositiveQ, "line " + std::to_string(line_no) + ": Q must be positive");
        }
        rows.emplace_back(t, q);
    }
    if (!have_header) {
        fail(Errc::ParseError, "line 1: missing header row");
    }
    if (rows.size() < 2) {
        fail(Errc::TooFewRows, "need at least two data rows, found " + std::to_string(rows.size()));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> t;
    std::vector<double> q;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first == rows[i - 1].first) {
            fail(Errc::DuplicateTime, "duplicate time " + format_number(rows[i].first));
        }
        t.push_back(rows[i].first);
        q.push_back(rows[i].second);
    }
    return Dataset{TimeSeries(std::move(t), std::move(q)), columns.t, columns.q, std::move(source)};
}

Dataset load_csv(const std::filesystem::path& path, const CsvColumns& columns)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(Errc::IoError, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), columns, path.filename().string());
}

std::string format_number(double value)
{
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string format_series_csv(const TimeSeries& series)
{
    std::string out = "t,Q\n";
    const auto t = series.times();
    const auto q = series.values();
    for (std::size_t i = 0; i < t.size(); ++i) {
        out += format_number(t[i]) + "," + format_number(q[i]) + "\n";
    }
    return out;
}

std::vector<double> uniform_grid(double t0, double t1, int n)
{
    if (n < 2 || !(t1 > t0)) {
        fail(Errc::InvalidArgument, "grid needs n >= 2 and t1 > t0");
    }
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        grid[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / (n - 1);
    }
    grid.back() = t1;
    return grid;
}

NormalStream::NormalStream(std::uint64_t seed) : engine_(seed) {}

double NormalStream::next()
{
    constexpr double kScale = 1.0 / 9007199254740992.0; // 2^-53
    const double u1 = static_cast<double>(engine_() >> 11) * kScale;
    const double u2 = static_cast<double>(engine_() >> 11) * kScale;
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Dataset synth_generate(const SynthConfig& config)
{
    if (!(config.sigma >= 0.0)) {
        fail(Errc::InvalidArgument, "sigma must be non-negative");
    }
    const auto t = uniform_grid(config.t0, config.t1, config.n);
    auto q = predict(config.model, t);
    if (config.sigma > 0.0) {
        NormalStream noise(config.seed);
        for (double& v : q) {
            v *= std::exp(config.sigma * noise.next());
        }
    }
    return Dataset{TimeSeries(t, std::move(q)), "t", "Q", "synthetic:" + family_label(config.model.family)};
}

json family_to_json(const GrowthFamily& family)
{
    json out;
    out["name"] = family_name(family);
    if (const auto* s = std::get_if<SingleTerm>(&family)) {
        out["k"] = s->k;
    } else if (const auto* m = std::get_if<MultiTerm>(&family)) {
        json weights = json::object();
        for (const auto& [k, a] : m->weights.terms()) {
            weights[std::to_string(k)] = a;
        }
        out["weights"] = weights;
    } else if (const auto* g = std::get_if<GompertzRef>(&family)) {
        out["b"] = g->b;
        out["tau"] = g->tau;
        out["K"] = g->K;
    }
    return out;
}

GrowthFamily family_from_json(const json& value)
{
    try {
        const auto name = value.at("name").get<std::string>();
        if (name == "exponential") {
            return Exponential{};
        }
        if (name == "logistic") {
            return Logistic{};
        }
        if (name == "sth") {
            return SingleTerm{value.at("k").get<int>()};
        }
        if (name == "multi") {
            std::map<int, double> terms;
            for (const auto& [key, a] : value.at("weights").items()) {
                terms[std::stoi(key)] = a.get<double>();
            }
            return MultiTerm{HinderingWeights::normalized(std::move(terms))};
        }
        fail(Errc::ParseError, "unknown family '" + name + "'");
    } catch (const json::exception& e) {
        fail(Errc::ParseError, std::string("malformed family object: ") + e.what());
    }
}

json fit_to_json(const FitResult& fit, const TimeSeries& series)
{
    const GrowthModel& m = fit.model;
    json out;
    out["family"] = family_to_json(m.family);
    out["label"] = family_label(m.family);
    out["g_u"] = m.g_u;
    out["Q_h"] = m.Q_h;
    out["t_h"] = m.t_h;
    out["x_h"] = m.x_h(series.t_front());
    out["x_range"] = json::array({m.x_rel(series.t_front()), m.x_rel(series.t_back())});
    out["rss"] = number_or_null(fit.rss);
    out["fvu"] = number_or_null(fit.fvu);
    out["fvu_log"] = number_or_null(fit.fvu_log);
    out["n"] = fit.n;
    out["n_params"] = fit.n_params;
    out["converged"] = fit.converged;
    out["restarts_used"] = fit.restarts_used;
    return out;
}

GrowthModel model_from_json(const json& value)
{
    try {
        GrowthModel model;
        model.family = family_from_json(value.at("family"));
        model.g_u = value.at("g_u").get<double>();
        model.Q_h = value.at("Q_h").get<double>();
        model.t_h = value.at("t_h").get<double>();
        model.validate();
        return model;
    } catch (const json::exception& e) {
        fail(Errc::ParseError, std::string("malformed model object: ") + e.what());
    }
}

json trend_to_json(const TrendResult& trend)
{
    return json{{"S", trend.S},
                {"var_S", trend.var_S},
                {"Z", trend.Z},
                {"p_one_tailed", trend.p_one_tailed},
                {"direction", to_string(trend.direction)},
                {"n", trend.n}};
}

json gate_to_json(const GateResult& gate)
{
    json out;
    out["alpha"] = gate.alpha;
    out["passed"] = gate.passed();
    out["q_pass"] = gate.q_pass;
    out["g_pass"] = gate.g_pass;
    out["reason"] = gate.reason;
    out["q_trend"] = trend_to_json(gate.q_trend);
    out["g_trend"] = gate.g_trend ? trend_to_json(*gate.g_trend) : json(nullptr);
    return out;
}

json forecast_to_json(const Forecast& point)
{
    return json{{"t", point.t}, {"Q", point.Q}, {"g", point.g}, {"x_minus_xh", point.x_minus_xh}};
}

json build_report(const Dataset& data, const LadderReport& report)
{
    const TimeSeries& series = data.series;
    json out;
    out["schema"] = std::string(kReportSchema);
    out["input"] = json{{"n", series.size()},
                        {"t_min", series.t_front()},
                        {"t_max", series.t_back()},
                        {"q_first", series.values().front()},
                        {"q_last", series.values().back()},
                        {"t_unit", data.t_unit},
                        {"q_unit", data.q_unit},
                        {"source", data.source}};
    out["gates"] = report.gate ? gate_to_json(*report.gate) : json(nullptr);

    json candidates = json::array();
    for (const auto& fit : report.candidates) {
        candidates.push_back(fit_to_json(fit, series));
    }
    out["candidates"] = candidates;

    json chain = json::array();
    for (std::size_t i = 0; i < report.f_chain.size(); ++i) {
        const auto& test = report.f_chain[i];
        chain.push_back(json{{"models", i < report.f_chain_labels.size() ? report.f_chain_labels[i] : ""},
                             {"F", number_or_null(test.F)},
                             {"df1", test.df1},
                             {"df2", test.df2},
                             {"p_value", test.p_value},
                             {"f_crit", number_or_null(test.f_crit)},
                             {"reject_null", test.reject_null},
                             {"comparisons", test.comparisons},
                             {"alpha", test.alpha}});
    }
    out["f_chain"] = chain;
    out["chosen"] = fit_to_json(report.chosen, series);

    const GrowthModel& model = report.chosen.model;
    json forecasts = json::array();
    for (double fraction : {0.0, 0.25, 0.5}) {
        forecasts.push_back(forecast_to_json(forecast(model, series.t_back() + fraction * series.span())));
    }
    out["forecasts"] = forecasts;

    json derived;
    derived["doubling_time"] = doubling_time(model.g_u);
    const auto capacity = carrying_capacity(model);
    derived["carrying_capacity"] = capacity ? json(*capacity) : json(nullptr);
    json alpha = json::object();
    if (const auto weights = hindering_weights(model.family)) {
        for (const auto& [k, a] : alpha_coefficients(*weights, model.Q_h)) {
            alpha[std::to_string(k)] = a;
        }
    }
    derived["alpha_coefficients"] = alpha;
    derived["q_h_ratio"] = report.q_h_ratio;
    derived["x_h"] = model.x_h(series.t_front());
    out["derived"] = derived;
    return out;
}

std::string dump_canonical(const json& value)
{
    std::string out;
    dump_value(value, out, 0);
    return out;
}

std::string emit_report_json(const json& report) { return dump_canonical(report) + "\n"; }

std::string emit_curves_csv(const GrowthModel& model, const std::vector<double>& grid, const TimeSeries* data)
{
    model.validate();
    struct Row {
        double t;
        double q_data;
        bool has_data;
    };
    std::vector<Row> rows;
    for (double t : grid) {
        rows.push_back({t, 0.0, false});
    }
    if (data != nullptr) {
        for (std::size_t i = 0; i < data->size(); ++i) {
            rows.push_back({data->times()[i], data->values()[i], true});
        }
    }
    // Data rows sort after grid rows at equal t so the merge below keeps them.
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
    std::vector<Row> merged;
    for (const auto& row : rows) {
        if (!merged.empty() && merged.back().t == row.t) {
            if (row.has_data) {
                merged.back() = row;
            }
            continue;
        }
        merged.push_back(row);
    }

    std::string out = "t,x_minus_xh,Q_model,g_model,Q_data,rel_residual\n";
    for (const auto& row : merged) {
        const Forecast point = forecast(model, row.t);
        out += format_number(row.t) + "," + format_number(point.x_minus_xh) + "," + format_number(point.Q) + "," +
               format_number(point.g) + ",";
        if (row.has_data) {
            out += format_number(row.q_data) + "," + format_number(row.q_data / point.Q - 1.0);
        } else {
            out += ",";
        }
        out += "\n";
    }
    return out;
}

std::string emit_forecast_csv(const std::vector<Forecast>& points)
{
    std::string out = "t,Q,g,x_minus_xh\n";
    for (const auto& p : points) {
        out += format_number(p.t) + "," + format_number(p.Q) + "," + format_number(p.g) + "," +
               format_number(p.x_minus_xh) + "\n";
    }
    return out;
}

} // namespace hinderfit
