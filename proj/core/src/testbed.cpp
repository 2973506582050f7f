#include "bomm/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bomm {

namespace {

void require_dims(const VectorXd& x, Eigen::Index d, const char* name) {
    if (x.size() != d) {
        std::ostringstream os;
        os << name << " expects " << d << " coordinates, got " << x.size();
        throw DomainError(os.str());
    }
}

}  // namespace

Domain six_hump_camel_domain() { return Domain({-2, -1, -2, -1, -2, -1}, {2, 1, 2, 1, 2, 1}); }

Domain wing_weight_domain() {
    return Domain({150, 220, 6, -10, 16, 0.5, 0.08, 2.5, 1700, 0.025},
                  {200, 300, 10, 10, 45, 1.0, 0.18, 6.0, 2500, 0.08});
}

Domain otl_circuit_domain() { return Domain({50, 25, 0.5, 1.2, 0.25, 50}, {150, 75, 3.0, 2.5, 1.2, 300}); }

Domain piston_domain() {
    return Domain({30, 0.005, 0.002, 1000, 90000, 290, 340}, {60, 0.020, 0.010, 5000, 110000, 296, 360});
}

Domain custom_exp_domain() {
    return Domain({0, 1, 0, 1.5, 0, 2, 2, 1, 2}, {5, 6, 5, 6.5, 5, 7, 7, 6, 7});
}

double six_hump_camel(const VectorXd& x) {
    require_dims(x, 6, "six_hump_camel");
    static const Domain dom = six_hump_camel_domain();
    dom.check(x);
    double total = 5.0;
    for (int k = 0; k < 3; ++k) {
        const double a = x[2 * k];
        const double b = x[2 * k + 1];
        const double a2 = a * a;
        const double b2 = b * b;
        total += (4.0 - 2.1 * a2 + a2 * a2 / 3.0) * a2 + a * b + (-4.0 + 4.0 * b2) * b2;
    }
    return total;
}

double wing_weight(const VectorXd& x) {
    require_dims(x, 10, "wing_weight");
    static const Domain dom = wing_weight_domain();
    dom.check(x);
    const double sw = x[0], wfw = x[1], a = x[2], q = x[4], taper = x[5], tc = x[6], nz = x[7],
                 wdg = x[8], wp = x[9];
    const double cos_sweep = std::cos(x[3] * M_PI / 180.0);
    return 0.036 * std::pow(sw, 0.758) * std::pow(wfw, 0.0035) * std::pow(a / (cos_sweep * cos_sweep), 0.6) *
               std::pow(q, 0.006) * std::pow(taper, 0.04) * std::pow(100.0 * tc / cos_sweep, -0.3) *
               std::pow(nz * wdg, 0.49) +
           sw * wp;
}

double otl_circuit(const VectorXd& x) {
    require_dims(x, 6, "otl_circuit");
    static const Domain dom = otl_circuit_domain();
    dom.check(x);
    const double rb1 = x[0], rb2 = x[1], rf = x[2], rc1 = x[3], rc2 = x[4], beta = x[5];
    const double vb1 = 12.0 * rb2 / (rb1 + rb2);
    const double g = beta * (rc2 + 9.0);
    const double denom = g + rf;
    return (vb1 + 0.74) * g / denom + 11.35 * rf / denom + 0.74 * rf * g / (denom * rc1);
}

double piston(const VectorXd& x) {
    require_dims(x, 7, "piston");
    static const Domain dom = piston_domain();
    dom.check(x);
    const double m = x[0], s = x[1], v0 = x[2], k = x[3], p0 = x[4], ta = x[5], t0 = x[6];
    const double a = p0 * s + 19.62 * m - k * v0 / s;
    const double v = s / (2.0 * k) * (std::sqrt(a * a + 4.0 * k * p0 * v0 / t0 * ta) - a);
    return 2.0 * M_PI * std::sqrt(m / (k + s * s * p0 * v0 / t0 * ta / (v * v)));
}

const std::vector<double>& custom_exp_centres() {
    static const std::vector<double> m{2.5, 3.5, 2.5, 4.0, 2.5, 4.5, 4.5, 3.5, 4.5};
    return m;
}

double custom_exp_additive(const VectorXd& x) {
    require_dims(x, 9, "custom_exp");
    static const Domain dom = custom_exp_domain();
    dom.check(x);
    double total = 0.0;
    for (int k = 0; k < 9; ++k) {
        const double power = (static_cast<double>(k % 3 + 1) + 1.0) / 2.0;
        // x = 0 gives exp(-inf) = 0, the continuous limit.
        total += std::exp(-2.0 / std::pow(x[k], power) + kCustomExpEpsilon);
    }
    return 10.0 * total;
}

double custom_exp_interaction(const VectorXd& x) {
    require_dims(x, 9, "custom_exp");
    static const Domain dom = custom_exp_domain();
    dom.check(x);
    const auto& m = custom_exp_centres();
    double total = 0.0;
    for (int b = 0; b < 3; ++b) {
        const int i = 3 * b;
        const double bracket = (x[i] - m[i]) - (x[i + 1] - m[i + 1]) - (x[i + 2] - m[i + 2]);
        total += bracket * bracket;
    }
    return total;
}

double custom_exp(const VectorXd& x, double lambda_int) {
    if (!(lambda_int >= 0.0)) throw ParameterError("custom_exp requires lambda_int >= 0");
    const double additive = custom_exp_additive(x);
    if (lambda_int == 0.0) return additive;
    return additive + lambda_int * custom_exp_interaction(x);
}

std::vector<std::string> test_function_names() {
    return {"six_hump_camel", "wing_weight", "otl_circuit", "piston", "custom_exp"};
}

TestFunction make_test_function(std::string_view name, double lambda_int) {
    TestFunction f;
    f.name = std::string(name);
    if (name == "six_hump_camel") {
        f.domain = six_hump_camel_domain();
        f.eval = six_hump_camel;
    } else if (name == "wing_weight") {
        f.domain = wing_weight_domain();
        f.eval = wing_weight;
    } else if (name == "otl_circuit") {
        f.domain = otl_circuit_domain();
        f.eval = otl_circuit;
    } else if (name == "piston") {
        f.domain = piston_domain();
        f.eval = piston;
    } else if (name == "custom_exp") {
        if (!(lambda_int >= 0.0)) throw ParameterError("custom_exp requires lambda_int >= 0");
        f.domain = custom_exp_domain();
        f.lambda_int = lambda_int;
        f.eval = [lambda_int](const VectorXd& x) { return custom_exp(x, lambda_int); };
    } else {
        throw ParameterError("unknown test function '" + std::string(name) + "'");
    }
    return f;
}

// ---------------------------------------------------------------------------

namespace {

/// Golden-section search for a minimum of g on [a, b], given an incumbent
/// (x0, g0) inside the bracket; returns the better of the incumbent and the
/// search result.
std::pair<double, double> golden_section(const std::function<double(double)>& g, double a, double b, double x0,
                                         double g0, int iters = 60) {
    constexpr double ratio = 0.6180339887498949;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double gc = g(c), gd = g(d);
    double best_x = x0, best_g = g0;
    for (int i = 0; i < iters && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++i) {
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - ratio * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + ratio * (b - a);
            gd = g(d);
        }
    }
    for (auto [x, v] : {std::pair{c, gc}, std::pair{d, gd}})
        if (v < best_g) {
            best_g = v;
            best_x = x;
        }
    return {best_x, best_g};
}

}  // namespace

VectorXd coordinate_refine(const Objective& f, const Domain& dom, VectorXd x, std::size_t rounds,
                           std::size_t line_grid) {
    line_grid = std::max<std::size_t>(line_grid, 3);
    double fx = f(x);
    for (std::size_t r = 0; r < rounds; ++r) {
        bool improved = false;
        for (Eigen::Index l = 0; l < x.size(); ++l) {
            const auto k = static_cast<std::size_t>(l);
            const double lo = dom.lower(k), hi = dom.upper(k);
            auto line = [&](double t) {
                VectorXd y = x;
                y[l] = std::clamp(t, lo, hi);
                return f(y);
            };
            double best_t = x[l], best_v = fx;
            const double step = (hi - lo) / static_cast<double>(line_grid - 1);
            for (std::size_t g = 0; g < line_grid; ++g) {
                const double t = g + 1 == line_grid ? hi : lo + step * static_cast<double>(g);
                const double v = line(t);
                if (v < best_v) {
                    best_v = v;
                    best_t = t;
                }
            }
            auto [t, v] = golden_section(line, std::max(lo, best_t - step), std::min(hi, best_t + step), best_t,
                                         best_v);
            if (v < fx) {
                x[l] = std::clamp(t, lo, hi);
                fx = v;
                improved = true;
            }
        }
        if (!improved) break;
    }
    return x;
}

OracleResult oracle_minimize(const TestFunction& f, const OracleConfig& cfg) {
    if (cfg.budget < 1) throw ParameterError("oracle budget must be positive");
    const auto d = static_cast<Eigen::Index>(f.dims());
    Rng rng(cfg.seed, 0);

    struct Cand {
        double value;
        std::size_t index;
        VectorXd x;
    };
    auto better = [](const Cand& a, const Cand& b) {
        return a.value < b.value || (a.value == b.value && a.index < b.index);
    };
    std::vector<Cand> top;              // best refine_best of the current prefix
    std::vector<Cand> refine_pool;      // union over checkpoints
    std::set<std::size_t> pooled;
    std::size_t next_checkpoint = 10000;

    auto flush = [&] {
        for (const auto& c : top)
            if (pooled.insert(c.index).second) refine_pool.push_back(c);
    };

    VectorXd u(d);
    for (std::size_t i = 0; i < cfg.budget; ++i) {
        for (Eigen::Index l = 0; l < d; ++l) u[l] = rng.uniform();
        VectorXd x = unscale_from_unit(u, f.domain);
        Cand c{f(x), i, std::move(x)};
        if (top.size() < cfg.refine_best) {
            top.push_back(std::move(c));
            std::push_heap(top.begin(), top.end(), better);
        } else if (better(c, top.front())) {
            std::pop_heap(top.begin(), top.end(), better);
            top.back() = std::move(c);
            std::push_heap(top.begin(), top.end(), better);
        }
        if (i + 1 == next_checkpoint) {
            flush();
            next_checkpoint *= 10;
        }
    }
    flush();
    std::sort(refine_pool.begin(), refine_pool.end(), [](const Cand& a, const Cand& b) { return a.index < b.index; });

    OracleResult best;
    best.function = f.name;
    best.lambda_int = f.lambda_int;
    best.budget = cfg.budget;
    best.seed = cfg.seed;
    best.f_opt = std::numeric_limits<double>::infinity();
    for (const auto& c : refine_pool) {
        VectorXd x = coordinate_refine(f.eval, f.domain, c.x, cfg.refine_rounds, cfg.line_grid);
        const double v = f(x);
        if (v < best.f_opt) {
            best.f_opt = v;
            best.x_opt = std::move(x);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

std::vector<OracleResult> load_oracle_fixtures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidDataError("cannot open oracle fixtures '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        std::vector<OracleResult> out;
        for (const auto& e : j.at("minima")) {
            OracleResult r;
            r.function = e.at("function").get<std::string>();
            r.lambda_int = e.value("lambda_int", 0.0);
            auto xs = e.at("x_opt").get<std::vector<double>>();
            r.x_opt = Eigen::Map<VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
            r.f_opt = e.at("f_opt").get<double>();
            r.budget = e.at("budget").get<std::size_t>();
            r.seed = e.at("seed").get<std::uint64_t>();
            out.push_back(std::move(r));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidDataError("malformed oracle fixtures '" + path + "': " + e.what());
    }
}

void save_oracle_fixtures(const std::string& path, const std::vector<OracleResult>& entries) {
    nlohmann::json j;
    j["version"] = 1;
    j["provenance"] = "derived: uniform multistart + coordinate refinement (bomm oracle)";
    auto& arr = j["minima"] = nlohmann::json::array();
    for (const auto& r : entries) {
        nlohmann::json e;
        e["function"] = r.function;
        e["lambda_int"] = r.lambda_int;
        e["x_opt"] = std::vector<double>(r.x_opt.data(), r.x_opt.data() + r.x_opt.size());
        e["f_opt"] = r.f_opt;
        e["budget"] = r.budget;
        e["seed"] = r.seed;
        arr.push_back(std::move(e));
    }
    std::ofstream out(path);
    if (!out) throw InvalidDataError("cannot write oracle fixtures '" + path + "'");
    out << j.dump(2) << '\n';
}

void upsert_oracle_fixture(std::vector<OracleResult>& entries, const OracleResult& r) {
    for (auto& e : entries)
        if (e.function == r.function && e.lambda_int == r.lambda_int) {
            e = r;
            return;
        }
    entries.push_back(r);
}

std::optional<OracleResult> find_oracle_fixture(const std::vector<OracleResult>& entries, std::string_view function,
                                                double lambda_int) {
    for (const auto& e : entries)
        if (e.function == function && (function != "custom_exp" || e.lambda_int == lambda_int)) return e;
    return std::nullopt;
}

}  // namespace bomm
