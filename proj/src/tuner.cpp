#include "dfc/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "dfc/csv.hpp"
#include "dfc/spectrum.hpp"

namespace dfc {

namespace {

constexpr double kProposalScale = 0.5;  // sd = scale * width * (T/T0)
constexpr double kInf = std::numeric_limits<double>::infinity();

double fold_into(double v, double lo, double hi) {
    const double w = hi - lo;
    if (w <= 0.0) return lo;
    double t = std::fmod(v - lo, 2.0 * w);
    if (t < 0.0) t += 2.0 * w;
    return lo + (t <= w ? t : 2.0 * w - t);
}

bool parse_indexed(const std::string& name, const std::string& prefix, int& i, int& j) {
    // "<prefix>(i,j)"
    if (name.size() < prefix.size() + 5 || name.compare(0, prefix.size(), prefix) != 0) return false;
    if (name[prefix.size()] != '(' || name.back() != ')') return false;
    const std::string inner = name.substr(prefix.size() + 1, name.size() - prefix.size() - 2);
    const auto comma = inner.find(',');
    if (comma == std::string::npos) return false;
    try {
        i = std::stoi(inner.substr(0, comma));
        j = std::stoi(inner.substr(comma + 1));
    } catch (...) {
        return false;
    }
    return true;
}

}  // namespace

ParamRef resolve_parameter(const std::string& name, int n, int m, int r) {
    if (name == "tau") return {ParamRef::Kind::Tau};
    if (name == "tau_q") return {ParamRef::Kind::TauQ};
    if (name == "k11" && r == 1 && m == 1) return {ParamRef::Kind::K1, 0, 0};
    int i = 0, j = 0;
    if (parse_indexed(name, "K1", i, j)) {
        if (i < 0 || i >= r || j < 0 || j >= m)
            throw std::invalid_argument("parameter " + name + " out of range for K1 (" +
                                        std::to_string(r) + "x" + std::to_string(m) + ")");
        return {ParamRef::Kind::K1, i, j};
    }
    if (parse_indexed(name, "K", i, j)) {
        if (i < 0 || i >= r || j < 0 || j >= n)
            throw std::invalid_argument("parameter " + name + " out of range for K (" +
                                        std::to_string(r) + "x" + std::to_string(n) + ")");
        return {ParamRef::Kind::K, i, j};
    }
    if (name.size() == 2 && name[0] == 'k' && name[1] >= '1' && name[1] <= '9' && r == 1) {
        const int col = name[1] - '1';
        if (col < n) return {ParamRef::Kind::K, 0, col};
    }
    throw std::invalid_argument("unknown tuning parameter '" + name +
                                "' (expected tau, tau_q, K(i,j), K1(i,j), k1..k9, k11)");
}

double get_parameter(const DelayedFeedbackController& ctrl, const ParamRef& ref) {
    switch (ref.kind) {
        case ParamRef::Kind::K: return ctrl.K(ref.row, ref.col);
        case ParamRef::Kind::K1: return ctrl.K1(ref.row, ref.col);
        case ParamRef::Kind::Tau: return ctrl.tau;
        case ParamRef::Kind::TauQ: return ctrl.tau_q;
    }
    return 0.0;
}

void set_parameter(DelayedFeedbackController& ctrl, const ParamRef& ref, double value) {
    switch (ref.kind) {
        case ParamRef::Kind::K: ctrl.K(ref.row, ref.col) = value; break;
        case ParamRef::Kind::K1: ctrl.K1(ref.row, ref.col) = value; break;
        case ParamRef::Kind::Tau: ctrl.tau = value; break;
        case ParamRef::Kind::TauQ: ctrl.tau_q = value; break;
    }
}

void apply_coupling(DelayedFeedbackController& ctrl, Coupling coupling) {
    if (coupling == Coupling::K2NegInvTauQ) {
        const int m = static_cast<int>(ctrl.K2.rows());
        if (ctrl.tau_q > 0.0)
            ctrl.K2 = -(1.0 / ctrl.tau_q) * Matrix::Identity(m, m);
    }
}

std::pair<double, double> TuneSpec::bounds_for(const std::string& name,
                                               const ParamRef& ref) const {
    const auto it = bounds.find(name);
    if (it != bounds.end()) return it->second;
    if (ref.kind == ParamRef::Kind::Tau || ref.kind == ParamRef::Kind::TauQ) return {0.01, 2.0};
    return {-10.0, 10.0};
}

void TuneSpec::validate(const Plant& plant) const {
    if (free_parameters.empty())
        throw std::invalid_argument("tune spec has no free parameters");
    if (max_iterations < 1) throw std::invalid_argument("tune max_iterations must be >= 1");
    if (!(schedule.T0 > 0.0)) throw std::invalid_argument("tune schedule T0 must be > 0");
    if (!(schedule.gamma > 0.0 && schedule.gamma < 1.0))
        throw std::invalid_argument("tune schedule gamma must be in (0,1)");
    if (restarts < 1) throw std::invalid_argument("tune restarts must be >= 1");
    for (const auto& name : free_parameters) {
        const ParamRef ref = resolve_parameter(name, plant.n(), plant.m(), plant.r());
        const auto [lo, hi] = bounds_for(name, ref);
        if (!(lo < hi))
            throw std::invalid_argument("tune bounds for " + name + " are infeasible (" +
                                        std::to_string(lo) + " >= " + std::to_string(hi) + ")");
        if ((ref.kind == ParamRef::Kind::Tau || ref.kind == ParamRef::Kind::TauQ) && lo < 0.01)
            throw std::invalid_argument("tune bounds for " + name + " must keep it >= 0.01 s");
    }
    for (const auto& [name, b] : bounds)
        resolve_parameter(name, plant.n(), plant.m(), plant.r());  // reject unknown names
}

double cost(const Plant& plant, const DelayedFeedbackController& tmpl, const TuneSpec& spec,
            const std::vector<double>& params) {
    if (params.size() != spec.free_parameters.size())
        throw std::invalid_argument("cost: wrong parameter count");
    DelayedFeedbackController ctrl = tmpl;
    for (size_t i = 0; i < params.size(); ++i) {
        const ParamRef ref =
            resolve_parameter(spec.free_parameters[i], plant.n(), plant.m(), plant.r());
        set_parameter(ctrl, ref, params[i]);
    }
    apply_coupling(ctrl, spec.coupling);
    try {
        const SpectrumResult res = rightmost_roots(build_closed_loop(plant, ctrl), 5);
        if (res.roots.empty() || !std::isfinite(res.abscissa)) return kInf;
        return res.abscissa;
    } catch (const std::exception&) {
        return kInf;
    }
}

TuneTrace anneal_minimize(const std::vector<std::string>& names, const std::vector<double>& x0,
                          const std::vector<std::pair<double, double>>& bounds,
                          const std::function<double(const std::vector<double>&)>& cost_fn,
                          double threshold, int max_iterations, unsigned long long seed,
                          const Schedule& schedule) {
    const size_t dim = x0.size();
    TuneTrace trace;
    trace.parameter_names = names;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<double> current = x0;
    for (size_t i = 0; i < dim; ++i)
        current[i] = std::clamp(current[i], bounds[i].first, bounds[i].second);
    double current_cost = cost_fn(current);

    trace.best_parameters = current;
    trace.best_cost = current_cost;
    trace.any_finite = std::isfinite(current_cost);
    trace.reached_threshold = current_cost < threshold;

    double T = schedule.T0;
    for (int iter = 1; iter <= max_iterations && !trace.reached_threshold; ++iter) {
        std::vector<double> candidate(dim);
        for (size_t i = 0; i < dim; ++i) {
            const double width = bounds[i].second - bounds[i].first;
            const double sd = kProposalScale * width * (T / schedule.T0);
            candidate[i] = fold_into(current[i] + sd * gauss(rng),
                                     bounds[i].first, bounds[i].second);
        }
        const double candidate_cost = cost_fn(candidate);
        if (std::isfinite(candidate_cost)) trace.any_finite = true;

        const double delta = candidate_cost - current_cost;
        const bool accept = (delta <= 0.0) || (unif(rng) < std::exp(-delta / T));
        if (accept) {
            current = candidate;
            current_cost = candidate_cost;
        }
        if (candidate_cost < trace.best_cost) {
            trace.best_cost = candidate_cost;
            trace.best_parameters = candidate;
        }
        trace.records.push_back({iter, T, candidate, candidate_cost, trace.best_cost});
        if (trace.best_cost < threshold) trace.reached_threshold = true;
        T *= schedule.gamma;
    }
    return trace;
}

AnnealResult anneal(const TuneSpec& spec, const Plant& plant,
                    const DelayedFeedbackController& tmpl) {
    spec.validate(plant);
    tmpl.validate(plant);

    std::vector<ParamRef> refs;
    std::vector<std::pair<double, double>> bounds;
    std::vector<double> x0;
    for (const auto& name : spec.free_parameters) {
        const ParamRef ref = resolve_parameter(name, plant.n(), plant.m(), plant.r());
        refs.push_back(ref);
        bounds.push_back(spec.bounds_for(name, ref));
        x0.push_back(get_parameter(tmpl, ref));
    }
    auto cost_fn = [&](const std::vector<double>& params) {
        return cost(plant, tmpl, spec, params);
    };

    TuneTrace best_trace;
    for (int chain = 0; chain < spec.restarts; ++chain) {
        TuneTrace trace = anneal_minimize(spec.free_parameters, x0, bounds, cost_fn,
                                          spec.threshold, spec.max_iterations,
                                          spec.seed + static_cast<unsigned long long>(chain),
                                          spec.schedule);
        if (chain == 0 || trace.best_cost < best_trace.best_cost) best_trace = std::move(trace);
    }

    AnnealResult result;
    result.best = tmpl;
    for (size_t i = 0; i < refs.size(); ++i)
        set_parameter(result.best, refs[i], best_trace.best_parameters[i]);
    apply_coupling(result.best, spec.coupling);
    result.success = best_trace.any_finite && best_trace.reached_threshold;
    result.trace = std::move(best_trace);
    return result;
}

void write_trace_csv(const std::string& path, const TuneTrace& trace) {
    CsvWriter csv(path);
    std::vector<std::string> header{"iter", "T", "cost", "best_cost"};
    header.insert(header.end(), trace.parameter_names.begin(), trace.parameter_names.end());
    csv.header(header);
    for (const auto& rec : trace.records) {
        csv.value(static_cast<double>(rec.iteration));
        csv.value(rec.temperature);
        csv.value(rec.candidate_cost);
        csv.value(rec.best_cost);
        for (double v : rec.candidate) csv.value(v);
        csv.end_row();
    }
}

}  // namespace dfc
