#include "hinderfit/fit.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "hinderfit/error.hpp"
#include "hinderfit/nelder_mead.hpp"

namespace hinderfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameters live in dimensionless coordinates so that the optimizer is
// blind to the time origin and units:
//   p[0] = ln(g_u * span)
//   p[1] = (t_h - t0) / span            (absent for the exponential)
//   p[2..] = ln(a_j / a_first)          (MultiTerm orders after the first)
constexpr double kParamBound = 50.0;
constexpr double kLogitBound = 40.0;

/// Runs fn(i) for i in [0, count) on up to worker_count() threads. Each task
/// writes only its own slot, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            run(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    run(i);
                }
            });
        }
    }
    for (const auto& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
}

std::vector<int> orders_of(const GrowthFamily& family)
{
    std::vector<int> orders;
    if (const auto weights = hindering_weights(family)) {
        for (const auto& [k, a] : weights->terms()) {
            orders.push_back(k);
        }
    }
    return orders;
}

bool is_multi(const GrowthFamily& family) { return std::holds_alternative<MultiTerm>(family); }

/// Evaluates the profiled relative RSS for one family on one series.
class Objective {
public:
    Objective(const TimeSeries& series, GrowthFamily family, const SolverSettings& settings)
        : series_(series), family_(std::move(family)), settings_(settings), t0_(series.t_front()),
          span_(series.span()), orders_(orders_of(family_)), xs_(series.size()), hs_(series.size())
    {
        tau_.reserve(series.size());
        for (double t : series.times()) {
            tau_.push_back((t - t0_) / span_);
        }
    }

    std::size_t dimension() const
    {
        if (std::holds_alternative<Exponential>(family_)) {
            return 1;
        }
        return is_multi(family_) ? 1 + orders_.size() : 2;
    }

    double operator()(std::span<const double> p) { return evaluate(p, nullptr); }

    /// Profiled RSS; writes the model when `model` is non-null.
    double evaluate(std::span<const double> p, GrowthModel* model)
    {
        for (std::size_t i = 0; i < std::min<std::size_t>(p.size(), 2); ++i) {
            if (!(std::abs(p[i]) <= kParamBound)) {
                return kInf;
            }
        }
        for (std::size_t i = 2; i < p.size(); ++i) {
            if (!(std::abs(p[i]) <= kLogitBound)) {
                return kInf;
            }
        }
        const double scaled_rate = std::exp(p[0]);
        const double tau_h = p.size() > 1 ? p[1] : 0.0;
        GrowthFamily family = family_;
        if (is_multi(family_)) {
            family = MultiTerm{weights_from(p)};
        }
        for (std::size_t i = 0; i < tau_.size(); ++i) {
            xs_[i] = scaled_rate * (tau_[i] - tau_h);
        }
        try {
            h_of_x(family, xs_, hs_, settings_);
        } catch (const Error&) {
            return kInf;
        }
        const auto q = series_.values();
        double sum_r = 0.0;
        double sum_r2 = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double r = hs_[i] / q[i];
            sum_r += r;
            sum_r2 += r * r;
        }
        if (!(sum_r2 > 0.0) || !std::isfinite(sum_r2)) {
            return kInf;
        }
        const double q_h = sum_r / sum_r2;
        double total = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double e = q_h * hs_[i] / q[i] - 1.0;
            total += e * e;
        }
        if (model != nullptr) {
            model->family = family;
            model->g_u = scaled_rate / span_;
            model->Q_h = q_h;
            model->t_h = t0_ + tau_h * span_;
        }
        return total;
    }

    /// Parameter vector reproducing `model`, with `new_weight` assigned to
    /// orders the model does not carry.
    std::vector<double> encode(const GrowthModel& model, double new_weight) const
    {
        std::vector<double> p;
        p.push_back(std::log(model.g_u * span_));
        if (dimension() == 1) {
            return p;
        }
        p.push_back((model.t_h - t0_) / span_);
        if (!is_multi(family_)) {
            return p;
        }
        std::map<int, double> known;
        if (const auto weights = hindering_weights(model.family)) {
            known = weights->terms();
        }
        std::vector<double> w;
        for (int k : orders_) {
            const auto it = known.find(k);
            w.push_back(it != known.end() ? it->second * (1.0 - new_weight) : new_weight);
        }
        for (std::size_t j = 1; j < w.size(); ++j) {
            p.push_back(std::clamp(std::log(w[j] / w[0]), -kLogitBound + 1.0, kLogitBound - 1.0));
        }
        return p;
    }

    std::vector<double> steps() const
    {
        std::vector<double> s(dimension(), 1.0);
        s[0] = 0.2;
        if (s.size() > 1) {
            s[1] = 0.1;
        }
        return s;
    }

    double t0() const { return t0_; }
    double span() const { return span_; }

private:
    HinderingWeights weights_from(std::span<const double> p) const
    {
        std::map<int, double> raw;
        double max_logit = 0.0;
        for (std::size_t j = 2; j < p.size(); ++j) {
            max_logit = std::max(max_logit, p[j]);
        }
        raw[orders_[0]] = std::exp(-max_logit);
        for (std::size_t j = 1; j < orders_.size(); ++j) {
            raw[orders_[j]] = std::exp(p[j + 1] - max_logit);
        }
        return HinderingWeights::normalized(std::move(raw));
    }

    const TimeSeries& series_;
    GrowthFamily family_;
    SolverSettings settings_;
    double t0_;
    double span_;
    std::vector<int> orders_;
    std::vector<double> tau_;
    std::vector<double> xs_;
    std::vector<double> hs_;
};

struct RateHeuristic {
    double g_u;
    double t_h;
};

/// g_u from the steepest windowed log-slope in the early part of the series;
/// t_h where the windowed slope first drops to half of that (last point if
/// it never does).
RateHeuristic rate_heuristic(const TimeSeries& series)
{
    const auto t = series.times();
    const auto q = series.values();
    const std::size_t n = series.size();
    const std::size_t w = std::max<std::size_t>(1, n / 20);
    std::vector<double> slope;
    std::vector<std::size_t> centre;
    for (std::size_t i = 0; i + w < n; ++i) {
        slope.push_back(std::log(q[i + w] / q[i]) / (t[i + w] - t[i]));
        centre.push_back(i + w / 2);
    }
    const std::size_t early = std::max<std::size_t>(1, slope.size() / 4);
    const auto peak = std::max_element(slope.begin(), slope.begin() + static_cast<std::ptrdiff_t>(early));
    double g_u = *peak;
    if (!(g_u > 0.0)) {
        g_u = *std::max_element(slope.begin(), slope.end());
    }
    if (!(g_u > 0.0)) {
        g_u = 1.0 / series.span();
    }
    RateHeuristic guess{g_u, t[n - 1]};
    for (auto it = peak; it != slope.end(); ++it) {
        if (*it <= 0.5 * g_u) {
            guess.t_h = t[centre[static_cast<std::size_t>(it - slope.begin())]];
            break;
        }
    }
    return guess;
}

std::vector<std::vector<double>> cold_starts(const TimeSeries& series, const Objective& objective, int count)
{
    const RateHeuristic guess = rate_heuristic(series);
    const double p0 = std::log(guess.g_u * objective.span());
    const double p1 = (guess.t_h - objective.t0()) / objective.span();
    // (rate factor, shift of t_h in units of the span)
    static constexpr std::array<std::pair<double, double>, 8> kPattern{{
        {1.0, 0.0},
        {0.5, 0.0},
        {2.0, 0.0},
        {1.0, 0.2},
        {1.0, -0.2},
        {0.5, 0.3},
        {2.0, -0.2},
        {1.5, 0.5},
    }};
    std::vector<std::vector<double>> starts;
    for (int i = 0; i < count; ++i) {
        const auto& [factor, shift] = kPattern[static_cast<std::size_t>(i) % kPattern.size()];
        const double spread = 1.0 + static_cast<double>(static_cast<std::size_t>(i) / kPattern.size());
        std::vector<double> p{p0 + std::log(factor) * spread};
        if (objective.dimension() > 1) {
            p.push_back(p1 + shift * spread);
        }
        // Equal weights for every MultiTerm order.
        p.resize(objective.dimension(), 0.0);
        starts.push_back(std::move(p));
    }
    return starts;
}

std::vector<std::vector<double>> warm_starts(const Objective& objective, const GrowthModel& init,
                                             const GrowthFamily& target, int count)
{
    std::vector<std::vector<double>> starts;
    const auto known = orders_of(init.family);
    bool adds_terms = false;
    for (int k : orders_of(target)) {
        adds_terms = adds_terms || std::find(known.begin(), known.end(), k) == known.end();
    }
    if (adds_terms) {
        static constexpr std::array<double, 4> kNewWeight{0.02, 0.15, 0.4, 0.005};
        for (int i = 0; i < count; ++i) {
            starts.push_back(objective.encode(init, kNewWeight[static_cast<std::size_t>(i) % kNewWeight.size()]));
        }
        return starts;
    }
    static constexpr std::array<double, 4> kRateShift{0.0, 0.1, -0.1, 0.25};
    for (int i = 0; i < count; ++i) {
        auto p = objective.encode(init, 0.1);
        p[0] += kRateShift[static_cast<std::size_t>(i) % kRateShift.size()];
        starts.push_back(std::move(p));
    }
    return starts;
}

/// F-test of `full` against `restricted` when `full` won a search over
/// `comparisons` candidates; the level is split evenly between them.
FTestResult search_f_test(const FitResult& restricted, const FitResult& full, int n, double alpha, int comparisons)
{
    comparisons = std::max(1, comparisons);
    FTestResult test = f_test(restricted.rss, full.rss, restricted.n_params, full.n_params, n, alpha / comparisons);
    test.comparisons = comparisons;
    return test;
}

bool less_rss(const FitResult& a, const FitResult& b)
{
    // Ties (relative 1e-12) keep the earlier candidate.
    return a.rss < b.rss && !(std::abs(a.rss - b.rss) <= 1e-12 * std::max(a.rss, b.rss));
}

} // namespace

void GrowthModel::validate() const
{
    if (std::holds_alternative<GompertzRef>(family)) {
        fail(Errc::UnsupportedFamily, "Gompertz cannot parameterize a growth model (no finite g_u)");
    }
    validate_family(family);
    if (!(g_u > 0.0) || !std::isfinite(g_u)) {
        fail(Errc::NonPositiveRate, "g_u must be positive and finite");
    }
    if (!(Q_h > 0.0) || !std::isfinite(Q_h)) {
        fail(Errc::NonPositiveQh, "Q_h must be positive and finite");
    }
    if (!std::isfinite(t_h)) {
        fail(Errc::DomainError, "t_h must be finite");
    }
}

double predict(const GrowthModel& model, double t, const SolverSettings& settings)
{
    model.validate();
    return model.Q_h * h_of_x(model.family, model.x_rel(t), settings);
}

std::vector<double> predict(const GrowthModel& model, std::span<const double> t, const SolverSettings& settings)
{
    model.validate();
    std::vector<double> x(t.size());
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        x[i] = model.x_rel(t[i]);
    }
    h_of_x(model.family, x, out, settings);
    for (double& v : out) {
        v *= model.Q_h;
    }
    return out;
}

double rss(const GrowthModel& model, const TimeSeries& series, const SolverSettings& settings)
{
    const auto fitted = predict(model, series.times(), settings);
    const auto q = series.values();
    double total = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double e = fitted[i] / q[i] - 1.0;
        total += e * e;
    }
    return total;
}

double xh_shift(const GrowthFamily& family, double q_h)
{
    if (!(q_h > 0.0) || !std::isfinite(q_h)) {
        fail(Errc::DomainError, "q_h must be positive");
    }
    if (std::holds_alternative<Logistic>(family)) {
        if (q_h <= 0.5) {
            fail(Errc::LogisticDomain, "logistic shift needs q_h > 1/2");
        }
        return std::log(2.0 * q_h - 1.0);
    }
    if (const auto* s = std::get_if<SingleTerm>(&family)) {
        return std::log(q_h) - std::expm1(-s->k * std::log(q_h)) / s->k;
    }
    return -x_of_h(family, 1.0 / q_h);
}

GateResult check_growth_preconditions(const TimeSeries& series, double alpha)
{
    GateResult gate;
    gate.alpha = alpha;
    gate.q_trend = mk_test(series, TrendDirection::Increasing);
    gate.q_pass = gate.q_trend.p_one_tailed < alpha;

    const RateSeries rates = growth_rates(series);
    try {
        gate.g_trend = mk_test(rates.g, TrendDirection::Decreasing);
        gate.g_pass = gate.g_trend->p_one_tailed < alpha;
    } catch (const Error& e) {
        if (e.code() == Errc::TooShort) {
            gate.reason = "g_series_too_short";
        } else if (e.code() == Errc::ZeroVariance) {
            gate.reason = "g_zero_variance";
        } else {
            throw;
        }
    }
    if (!gate.q_pass) {
        gate.reason = "q_trend_not_increasing";
    } else if (!gate.g_pass && gate.reason.empty()) {
        gate.reason = "g_trend_not_decreasing";
    }
    return gate;
}

int parameter_count(const GrowthFamily& family)
{
    if (std::holds_alternative<Exponential>(family)) {
        return 2;
    }
    if (const auto* m = std::get_if<MultiTerm>(&family)) {
        return 3 + static_cast<int>(m->weights.size()) - 1;
    }
    return 3;
}

void score_fit(FitResult& fit, const TimeSeries& series, const SolverSettings& settings)
{
    const auto fitted = predict(fit.model, series.times(), settings);
    const FitQuality quality = r2_fvu(series, fitted);
    fit.fvu = quality.fvu;
    fit.fvu_log = quality.fvu_log;
}

FitResult fit_family(const TimeSeries& series, const GrowthFamily& family, const std::optional<GrowthModel>& init,
                     const FitOptions& options)
{
    if (std::holds_alternative<GompertzRef>(family)) {
        fail(Errc::UnsupportedFamily, "Gompertz is a reference curve and cannot be fitted");
    }
    validate_family(family);
    Objective objective(series, family, options.solver);
    const optim::Objective f = [&objective](std::span<const double> p) { return objective(p); };

    const auto starts = init ? warm_starts(objective, *init, family, std::max(1, options.warm_starts))
                             : cold_starts(series, objective, std::max(1, options.starts));
    const auto steps = objective.steps();

    // Screen every start loosely, then polish the best one.
    optim::NelderMeadOptions screen;
    screen.rel_tol = options.screen_tol;
    screen.max_evals = options.screen_evals;
    std::optional<optim::NelderMeadResult> best;
    for (const auto& start : starts) {
        auto result = optim::nelder_mead(f, start, steps, screen);
        if (!best || result.value < best->value) {
            best = std::move(result);
        }
    }
    if (!best || !std::isfinite(best->value)) {
        fail(Errc::OptimizerFailure, "no start produced a finite objective for " + family_label(family));
    }

    optim::NelderMeadOptions polish;
    polish.rel_tol = options.rel_tol;
    polish.max_evals = options.polish_evals;
    auto current = optim::nelder_mead(f, best->x, steps, polish);
    int restarts = 0;
    std::vector<double> small_steps = steps;
    for (double& s : small_steps) {
        s *= 0.05;
    }
    while (restarts < options.max_restarts) {
        auto again = optim::nelder_mead(f, current.x, small_steps, polish);
        ++restarts;
        const bool improved = again.value < current.value;
        if (improved || !current.converged) {
            current = std::move(again);
        }
        if (!improved && current.converged) {
            break;
        }
    }

    FitResult fit;
    fit.rss = objective.evaluate(current.x, &fit.model);
    fit.n = static_cast<int>(series.size());
    fit.n_params = parameter_count(fit.model.family);
    fit.converged = current.converged;
    fit.restarts_used = restarts;
    score_fit(fit, series, options.solver);
    return fit;
}

MinimalSelection select_minimal(const TimeSeries& series, const SelectionOptions& options)
{
    if (!options.use_sth && !options.use_logistic) {
        fail(Errc::InvalidArgument, "select_minimal needs single-term or logistic candidates");
    }
    if (options.use_sth && (options.k_min < 1 || options.k_max > kMaxOrder || options.k_min > options.k_max)) {
        fail(Errc::InvalidArgument, "k range must lie within [1, 16]");
    }
    std::vector<GrowthFamily> families;
    if (options.use_sth) {
        for (int k = options.k_min; k <= options.k_max; ++k) {
            families.emplace_back(SingleTerm{k});
        }
    }
    if (options.use_logistic) {
        families.emplace_back(Logistic{});
    }
    std::vector<FitResult> fits(families.size());
    parallel_for(families.size(),
                 [&](std::size_t i) { fits[i] = fit_family(series, families[i], std::nullopt, options.fit); });

    MinimalSelection selection;
    if (options.use_logistic) {
        selection.logistic = fits.back();
        fits.pop_back();
    }
    selection.sth_fits = std::move(fits);
    // Single-term fits come in increasing k, and the logistic is considered
    // last, so keeping the first minimum implements the tie-break.
    std::optional<FitResult> best;
    for (const auto& fit : selection.sth_fits) {
        if (!best || less_rss(fit, *best)) {
            best = fit;
        }
    }
    if (best) {
        selection.best_sth = *best;
    }
    if (selection.logistic && (!best || less_rss(*selection.logistic, *best))) {
        best = selection.logistic;
    }
    selection.chosen = *best;
    return selection;
}

namespace {

GrowthModel with_family(GrowthModel model, GrowthFamily family)
{
    model.family = std::move(family);
    return model;
}

/// Moves single orders of a multi-term fit by up to two steps, keeping the
/// moved term's weight, while that lowers the RSS. Adding terms one at a time
/// tends to bracket a true order from both sides ([1,7] then [1,7,9] for a
/// true [1,8]); this lets the ladder settle on the order itself.
FitResult refine_orders(const TimeSeries& series, FitResult best, const LadderOptions& options,
                        const FitOptions& rough)
{
    for (int sweep = 0; sweep < options.max_order_sweeps; ++sweep) {
        const auto weights = hindering_weights(best.model.family)->terms();
        std::vector<GrowthFamily> trials;
        for (const auto& [k, a] : weights) {
            for (int delta : {-2, -1, 1, 2}) {
                const int moved = k + delta;
                if (moved < 1 || moved > options.k_cap || weights.contains(moved)) {
                    continue;
                }
                auto terms = weights;
                terms.erase(k);
                terms[moved] = a;
                trials.emplace_back(MultiTerm{HinderingWeights::normalized(std::move(terms))});
            }
        }
        if (trials.empty()) {
            break;
        }
        std::vector<FitResult> screened(trials.size());
        parallel_for(trials.size(), [&](std::size_t i) {
            screened[i] = fit_family(series, trials[i], with_family(best.model, trials[i]), rough);
        });
        const auto winner = std::min_element(screened.begin(), screened.end(),
                                             [](const FitResult& a, const FitResult& b) { return less_rss(a, b); });
        if (!less_rss(*winner, best)) {
            break;
        }
        FitOptions refine = options.fit;
        refine.warm_starts = 1;
        FitResult polished = fit_family(series, winner->model.family, winner->model, refine);
        if (!less_rss(polished, best)) {
            break;
        }
        best = std::move(polished);
    }
    return best;
}

} // namespace

LadderReport extend_ladder(const TimeSeries& series, const FitResult& base, const LadderOptions& options)
{
    LadderReport report;
    report.candidates.push_back(base);
    report.chosen = base;
    report.q_h_ratio = base.model.Q_h / series.values()[0];
    if (!std::holds_alternative<SingleTerm>(base.model.family) && !is_multi(base.model.family)) {
        return report;
    }
    if (options.k_cap < 1 || options.k_cap > kMaxOrder) {
        fail(Errc::InvalidArgument, "k_cap must lie in [1, 16]");
    }
    const int n = static_cast<int>(series.size());
    FitResult current = base;
    for (int terms = static_cast<int>(orders_of(current.model.family).size()) + 1; terms <= options.max_terms;
         ++terms) {
        const auto known = orders_of(current.model.family);
        const auto current_weights = *hindering_weights(current.model.family);
        std::vector<GrowthFamily> trials;
        for (int k = 1; k <= options.k_cap; ++k) {
            if (std::find(known.begin(), known.end(), k) != known.end()) {
                continue;
            }
            auto terms_map = current_weights.terms();
            terms_map[k] = 1.0;
            trials.emplace_back(MultiTerm{HinderingWeights::normalized(std::move(terms_map))});
        }
        if (trials.empty()) {
            break;
        }
        // Cheap pass over every order, then full fits of the best few.
        FitOptions rough = options.fit;
        rough.warm_starts = std::min(rough.warm_starts, 2);
        rough.screen_evals = std::min(rough.screen_evals, 150);
        rough.rel_tol = std::max(rough.rel_tol, 1e-5);
        rough.polish_evals = std::min(rough.polish_evals, 300);
        rough.max_restarts = 0;
        std::vector<FitResult> screened(trials.size());
        parallel_for(trials.size(), [&](std::size_t i) {
            screened[i] = fit_family(series, trials[i], current.model, rough);
        });
        std::vector<std::size_t> order(trials.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return less_rss(screened[a], screened[b]); });
        order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(1, options.finalists))));
        std::vector<FitResult> fits(order.size());
        FitOptions refine = options.fit;
        refine.warm_starts = 1;
        parallel_for(order.size(), [&](std::size_t i) {
            const std::size_t j = order[i];
            fits[i] = fit_family(series, trials[j], screened[j].model, refine);
        });
        const FitResult* best_rough = &fits.front();
        for (const auto& fit : fits) {
            if (less_rss(fit, *best_rough)) {
                best_rough = &fit;
            }
        }
        const FitResult refined = refine_orders(series, *best_rough, options, rough);
        const FitResult* best = &refined;
        const FTestResult test =
            search_f_test(current, *best, n, options.alpha, static_cast<int>(trials.size()));
        report.candidates.push_back(*best);
        report.f_chain.push_back(test);
        report.f_chain_labels.push_back(family_label(current.model.family) + " -> " + family_label(best->model.family));
        if (!test.reject_null) {
            break;
        }
        current = *best;
    }
    report.chosen = current;
    report.q_h_ratio = current.model.Q_h / series.values()[0];
    return report;
}

LadderReport run_ladder(const TimeSeries& series, const PipelineOptions& options)
{
    GateResult gate = check_growth_preconditions(series, options.alpha);
    if (!gate.passed() && !options.override_gates) {
        fail(Errc::GateFailed, gate.reason);
    }

    SelectionOptions selection_options;
    selection_options.k_min = options.k_min;
    selection_options.k_max = options.k_max;
    selection_options.use_sth = options.use_sth;
    selection_options.use_logistic = options.use_logistic;
    selection_options.fit = options.fit;

    FitResult exponential = fit_family(series, Exponential{}, std::nullopt, options.fit);
    const MinimalSelection selection = select_minimal(series, selection_options);

    LadderReport report;
    report.gate = std::move(gate);
    report.candidates.push_back(exponential);
    for (const auto& fit : selection.sth_fits) {
        report.candidates.push_back(fit);
    }
    if (selection.logistic) {
        report.candidates.push_back(*selection.logistic);
    }

    const int n = static_cast<int>(series.size());
    const FitResult& minimal = selection.chosen;
    const FTestResult hindering_test =
        search_f_test(exponential, minimal, n, options.alpha,
                      static_cast<int>(selection.sth_fits.size() + (selection.logistic ? 1 : 0)));
    report.f_chain.push_back(hindering_test);
    report.f_chain_labels.push_back("exponential -> " + family_label(minimal.model.family));
    report.chosen = hindering_test.reject_null ? minimal : exponential;

    if (hindering_test.reject_null && options.use_multi && options.max_terms >= 2 &&
        std::holds_alternative<SingleTerm>(minimal.model.family)) {
        LadderOptions ladder_options;
        ladder_options.alpha = options.alpha;
        ladder_options.max_terms = options.max_terms;
        ladder_options.k_cap = options.k_max;
        ladder_options.fit = options.fit;
        LadderReport extension = extend_ladder(series, minimal, ladder_options);
        for (std::size_t i = 1; i < extension.candidates.size(); ++i) {
            report.candidates.push_back(extension.candidates[i]);
        }
        for (std::size_t i = 0; i < extension.f_chain.size(); ++i) {
            report.f_chain.push_back(extension.f_chain[i]);
            report.f_chain_labels.push_back(extension.f_chain_labels[i]);
        }
        report.chosen = extension.chosen;
    }
    report.q_h_ratio = report.chosen.model.Q_h / series.values()[0];
    return report;
}

int worker_count()
{
    if (const char* env = std::getenv("HINDERFIT_THREADS")) {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && value >= 1) {
            return static_cast<int>(std::min<long>(value, 256));
        }
    }
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

} // namespace hinderfit
