#include "dfc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dfc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw std::runtime_error(field + ": " + message);
}

void expect_keys(const json& obj, const std::string& field, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(field, "expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) fail(field + "." + key, "unknown key");
}

double number(const json& v, const std::string& field) {
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) fail(field, "expected an integer");
    return v.get<int>();
}

Matrix matrix(const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) fail(field, "expected a non-empty array of rows");
    const size_t rows = v.size();
    size_t cols = 0;
    for (size_t i = 0; i < rows; ++i)
        if (!v[i].is_array() || v[i].empty())
            fail(field, "row " + std::to_string(i) + " is not a non-empty array");
    cols = v[0].size();
    Matrix M(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (v[i].size() != cols)
            fail(field, "ragged rows (row " + std::to_string(i) + " has " +
                            std::to_string(v[i].size()) + " entries, expected " +
                            std::to_string(cols) + ")");
        for (size_t j = 0; j < cols; ++j)
            M(i, j) = number(v[i][j], field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    return M;
}

Vector vector(const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) fail(field, "expected a non-empty numeric array");
    Vector out(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        out[i] = number(v[i], field + "[" + std::to_string(i) + "]");
    return out;
}

Plant parse_plant(const json& obj, const std::string& field) {
    expect_keys(obj, field, {"A", "B", "C"});
    for (const char* key : {"A", "B", "C"})
        if (!obj.contains(key)) fail(field, std::string("missing key ") + key);
    Plant plant{matrix(obj["A"], field + ".A"), matrix(obj["B"], field + ".B"),
                matrix(obj["C"], field + ".C")};
    try {
        plant.validate();
    } catch (const std::exception& e) {
        fail(field, e.what());
    }
    return plant;
}

DelayedFeedbackController parse_controller(const json& obj, const std::string& field,
                                           const std::optional<Plant>& plant) {
    expect_keys(obj, field, {"K", "K1", "K2", "tau", "tau_q", "p"});
    for (const char* key : {"K", "K1", "tau"})
        if (!obj.contains(key)) fail(field, std::string("missing key ") + key);
    DelayedFeedbackController ctrl;
    ctrl.K = matrix(obj["K"], field + ".K");
    ctrl.K1 = matrix(obj["K1"], field + ".K1");
    const int m = static_cast<int>(ctrl.K1.cols());
    ctrl.K2 = obj.contains("K2") ? matrix(obj["K2"], field + ".K2") : Matrix::Zero(m, m);
    ctrl.tau = number(obj["tau"], field + ".tau");
    ctrl.tau_q = obj.contains("tau_q") ? number(obj["tau_q"], field + ".tau_q") : 0.0;
    ctrl.p = obj.contains("p") ? integer(obj["p"], field + ".p") : 0;
    if (plant) {
        try {
            ctrl.validate(*plant);
        } catch (const std::exception& e) {
            fail(field, e.what());
        }
    }
    return ctrl;
}

Signal parse_signal(const json& arr, const std::string& field, int expected_dim) {
    if (!arr.is_array()) fail(field, "expected an array of pieces");
    Signal sig;
    for (size_t i = 0; i < arr.size(); ++i) {
        const std::string pf = field + "[" + std::to_string(i) + "]";
        expect_keys(arr[i], pf, {"t_start", "coeffs", "direction"});
        for (const char* key : {"t_start", "coeffs", "direction"})
            if (!arr[i].contains(key)) fail(pf, std::string("missing key ") + key);
        Signal::Piece piece;
        piece.t_start = number(arr[i]["t_start"], pf + ".t_start");
        const Vector c = vector(arr[i]["coeffs"], pf + ".coeffs");
        if (c.size() != 3) fail(pf + ".coeffs", "expected exactly [c0, c1, c2]");
        piece.coeffs = {c[0], c[1], c[2]};
        piece.direction = vector(arr[i]["direction"], pf + ".direction");
        if (expected_dim > 0 && piece.direction.size() != expected_dim)
            fail(pf + ".direction", "dimension " + std::to_string(piece.direction.size()) +
                                        " does not match plant (" + std::to_string(expected_dim) + ")");
        sig.pieces.push_back(std::move(piece));
    }
    try {
        sig.validate();
    } catch (const std::exception& e) {
        fail(field, e.what());
    }
    return sig;
}

TuneSpec parse_tune(const json& obj, const std::string& field, const Plant& plant) {
    expect_keys(obj, field,
                {"free", "bounds", "coupling", "threshold", "max_iterations", "seed", "schedule",
                 "restarts"});
    if (!obj.contains("free")) fail(field, "missing key free");
    TuneSpec spec;
    if (!obj["free"].is_array() || obj["free"].empty())
        fail(field + ".free", "expected a non-empty array of parameter names");
    for (const auto& name : obj["free"]) {
        if (!name.is_string()) fail(field + ".free", "parameter names must be strings");
        spec.free_parameters.push_back(name.get<std::string>());
    }
    if (obj.contains("bounds")) {
        if (!obj["bounds"].is_object()) fail(field + ".bounds", "expected an object");
        for (const auto& [name, lim] : obj["bounds"].items()) {
            const Vector b = vector(lim, field + ".bounds." + name);
            if (b.size() != 2) fail(field + ".bounds." + name, "expected [lo, hi]");
            spec.bounds[name] = {b[0], b[1]};
        }
    }
    if (obj.contains("coupling")) {
        const std::string c = obj["coupling"].is_string() ? obj["coupling"].get<std::string>() : "";
        if (c == "none") spec.coupling = Coupling::None;
        else if (c == "k2_neg_inv_tau_q") spec.coupling = Coupling::K2NegInvTauQ;
        else fail(field + ".coupling", "expected \"none\" or \"k2_neg_inv_tau_q\"");
    }
    if (obj.contains("threshold")) spec.threshold = number(obj["threshold"], field + ".threshold");
    if (obj.contains("max_iterations"))
        spec.max_iterations = integer(obj["max_iterations"], field + ".max_iterations");
    if (obj.contains("seed")) {
        if (!obj["seed"].is_number_integer() || obj["seed"].get<long long>() < 0)
            fail(field + ".seed", "expected a nonnegative integer");
        spec.seed = obj["seed"].get<unsigned long long>();
    }
    if (obj.contains("restarts")) spec.restarts = integer(obj["restarts"], field + ".restarts");
    if (obj.contains("schedule")) {
        expect_keys(obj["schedule"], field + ".schedule", {"T0", "gamma"});
        if (obj["schedule"].contains("T0"))
            spec.schedule.T0 = number(obj["schedule"]["T0"], field + ".schedule.T0");
        if (obj["schedule"].contains("gamma"))
            spec.schedule.gamma = number(obj["schedule"]["gamma"], field + ".schedule.gamma");
    }
    try {
        spec.validate(plant);
    } catch (const std::exception& e) {
        fail(field, e.what());
    }
    return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(origin, e.what());
    }
    expect_keys(root, origin, {"plant", "controller", "signals", "sim", "tune", "output"});

    ExperimentConfig cfg;
    if (root.contains("plant")) cfg.plant = parse_plant(root["plant"], "plant");
    if (root.contains("controller"))
        cfg.controller = parse_controller(root["controller"], "controller", cfg.plant);
    if (root.contains("signals")) {
        expect_keys(root["signals"], "signals", {"r", "d1", "d2"});
        const int n = cfg.plant ? cfg.plant->n() : 0;
        const int m = cfg.plant ? cfg.plant->m() : 0;
        if (root["signals"].contains("r")) cfg.r = parse_signal(root["signals"]["r"], "signals.r", m);
        if (root["signals"].contains("d1"))
            cfg.d1 = parse_signal(root["signals"]["d1"], "signals.d1", n);
        if (root["signals"].contains("d2"))
            cfg.d2 = parse_signal(root["signals"]["d2"], "signals.d2", n);
    }
    if (root.contains("sim")) {
        expect_keys(root["sim"], "sim", {"horizon", "step"});
        if (root["sim"].contains("horizon"))
            cfg.horizon = number(root["sim"]["horizon"], "sim.horizon");
        if (root["sim"].contains("step")) cfg.step = number(root["sim"]["step"], "sim.step");
        if (cfg.horizon <= 0.0) fail("sim.horizon", "must be > 0");
        if (cfg.step < 0.0) fail("sim.step", "must be >= 0");
    }
    if (root.contains("tune")) {
        if (!cfg.plant) fail("tune", "requires a plant section");
        cfg.tune = parse_tune(root["tune"], "tune", *cfg.plant);
    }
    if (root.contains("output")) {
        expect_keys(root["output"], "output", {"directory", "plots"});
        if (root["output"].contains("directory")) {
            if (!root["output"]["directory"].is_string())
                fail("output.directory", "expected a string");
            cfg.out_dir = root["output"]["directory"].get<std::string>();
        }
        if (root["output"].contains("plots")) {
            if (!root["output"]["plots"].is_boolean()) fail("output.plots", "expected a boolean");
            cfg.plots = root["output"]["plots"].get<bool>();
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

std::string controller_json(const DelayedFeedbackController& ctrl) {
    json obj;
    auto to_rows = [](const Matrix& M) {
        json rows = json::array();
        for (int i = 0; i < M.rows(); ++i) {
            json row = json::array();
            for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
            rows.push_back(row);
        }
        return rows;
    };
    obj["controller"] = {{"K", to_rows(ctrl.K)},   {"K1", to_rows(ctrl.K1)},
                         {"K2", to_rows(ctrl.K2)}, {"tau", ctrl.tau},
                         {"tau_q", ctrl.tau_q},    {"p", ctrl.p}};
    return obj.dump(2);
}

}  // namespace dfc
