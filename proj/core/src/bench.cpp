#include "bomm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "bomm/design.hpp"
#include "bomm/io.hpp"
#include "json.hpp"

namespace bomm {

std::size_t ExperimentConfig::dims() const {
    if (external) return external_domain.dims();
    return make_test_function(function, lambda_int).dims();
}

void ExperimentConfig::validate() const {
    if (!external && function.empty()) throw ParameterError("experiment needs a function or an external command");
    if (external && external_domain.dims() == 0) throw ParameterError("external objective needs a domain");
    if (methods.empty()) throw ParameterError("experiment needs at least one method");
    if (replications < 1) throw ParameterError("replications must be at least 1");
    if (sample_size() < 2) throw ParameterError("sample size must be at least 2");
    plus.diagnostic.validate();
}

const GapSummary* ExperimentResult::summary(Method m) const {
    for (const auto& s : summaries)
        if (s.method == m) return &s;
    return nullptr;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

using Ms = std::chrono::duration<double, std::milli>;

struct Replication {
    const ExperimentConfig& cfg;
    const Domain& dom;
    const Objective& f;
    std::optional<double> f_opt;
    std::uint64_t seed;

    std::vector<RunRecord> run() {
        Rng rng(seed, 0);
        LhdConfig lhd = LhdConfig::defaults(cfg.sample_size(), dom.dims());
        if (cfg.maximin_iters > 0) lhd.maximin_iters = cfg.maximin_iters;
        Rng design_rng = rng.split(1);
        const MatrixXd X = unscale_rows_from_unit(maximin_lhd(lhd, design_rng), dom);
        VectorXd y(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) y[i] = f(X.row(i).transpose());
        const Dataset data(DesignMatrix(X), y);
        const auto hash = data.content_hash();

        std::map<SurrogateKind, std::optional<FittedTaag>> models;
        std::map<SurrogateKind, std::string> fit_errors;
        auto model = [&](SurrogateKind kind) -> const FittedTaag& {
            auto& slot = models[kind];
            if (!slot) {
                if (fit_errors.count(kind)) throw FitError(fit_errors[kind]);
                FitConfig fc = cfg.fit;
                fc.kind = kind;
                Rng fit_rng = rng.split(10 + static_cast<std::uint64_t>(kind));
                try {
                    slot = fit(data, dom, fc, fit_rng);
                } catch (const Error& e) {
                    fit_errors[kind] = e.what();
                    throw;
                }
            }
            return *slot;
        };

        std::vector<RunRecord> out;
        for (Method m : cfg.methods) {
            RunRecord rec;
            rec.method = m;
            rec.seed = seed;
            rec.function = cfg.external ? std::string("external") : cfg.function;
            rec.lambda_int = cfg.lambda_int;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                EstimatorResult r = estimate(m, data, model, rng);
                rec.x_hat = r.x_hat;
                rec.xi = r.xi;
                rec.alpha_star = r.alpha_star;
                rec.branch = r.branch;
                rec.f_at_x_hat = r.f_at_x_hat ? *r.f_at_x_hat : f(r.x_hat);
                if (f_opt) {
                    double gap = *rec.f_at_x_hat - *f_opt;
                    if (gap < 0.0) {
                        std::ostringstream os;
                        os << to_string(m) << " seed " << seed << " beat the reference minimum by " << -gap
                           << "; gap clamped to 0";
                        warn(os.str());
                        gap = 0.0;
                    }
                    rec.gap = gap;
                }
            } catch (const EvaluationError&) {
                throw;
            } catch (const Error& e) {
                rec.error = e.what();
            }
            if (cfg.timing) rec.wall_ms = Ms(std::chrono::steady_clock::now() - t0).count();
            out.push_back(std::move(rec));
        }
        if (data.content_hash() != hash) throw Error("dataset changed between methods");
        return out;
    }

    template <class ModelFn>
    EstimatorResult estimate(Method m, const Dataset& data, ModelFn& model, const Rng& rng) {
        switch (m) {
            case Method::pw: return pick_the_winner(data);
            case Method::sbo_sqexp:
            case Method::sbo_taag:
            case Method::sbo_tag: {
                const SurrogateKind kind = m == Method::sbo_sqexp ? SurrogateKind::sqexp
                                           : m == Method::sbo_tag ? SurrogateKind::tag
                                                                  : SurrogateKind::taag;
                Rng search_rng = rng.split(20 + static_cast<std::uint64_t>(kind));
                return sbo_optimize(model(kind), cfg.search, search_rng);
            }
            case Method::bomm: return bomm(model(SurrogateKind::taag), cfg.plus.grid_size);
            case Method::bomm_tail: {
                const FittedTaag& mdl = model(SurrogateKind::taag);
                return bomm_tail(mdl, select_alpha(mdl, cfg.plus.alpha_grid, cfg.plus.grid_size), cfg.plus.grid_size);
            }
            case Method::bomm_plus: {
                Rng diag_rng = rng.split(30);
                return bomm_plus(model(SurrogateKind::taag), cfg.plus, diag_rng);
            }
        }
        throw ParameterError("unsupported method");
    }
};

bool record_less(const RunRecord& a, const RunRecord& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.lambda_int != b.lambda_int) return a.lambda_int < b.lambda_int;
    return a.seed < b.seed;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    Domain dom;
    std::shared_ptr<const TestFunction> tf;
    if (cfg.external) {
        dom = cfg.external_domain;
    } else {
        tf = std::make_shared<TestFunction>(make_test_function(cfg.function, cfg.lambda_int));
        dom = tf->domain;
        if (!cfg.oracle_path.empty() || cfg.require_oracle) {
            std::optional<OracleResult> ref;
            if (!cfg.oracle_path.empty() && std::ifstream(cfg.oracle_path).good())
                ref = find_oracle_fixture(load_oracle_fixtures(cfg.oracle_path), cfg.function, cfg.lambda_int);
            if (ref)
                result.f_opt = ref->f_opt;
            else if (cfg.require_oracle)
                throw Error("no reference minimum for " + cfg.function + " (lambda_int " +
                            format_double(cfg.lambda_int) + "); run `bomm oracle --function " + cfg.function +
                            "` first");
        }
    }

    std::vector<std::vector<RunRecord>> per_rep(cfg.replications);
    std::vector<std::exception_ptr> errors(cfg.replications);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        std::unique_ptr<ExternalObjective> ext;
        Objective f;
        if (cfg.external) {
            ext = std::make_unique<ExternalObjective>(*cfg.external);
            f = [&ext](const VectorXd& x) { return (*ext)(x); };
        } else {
            f = tf->eval;
        }
        for (std::size_t r = next++; r < cfg.replications; r = next++) {
            try {
                Replication rep{cfg, dom, f, result.f_opt, cfg.seed + r};
                per_rep[r] = rep.run();
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, cfg.replications));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (auto& v : per_rep)
        for (auto& rec : v) result.records.push_back(std::move(rec));
    std::stable_sort(result.records.begin(), result.records.end(), record_less);
    result.summaries = summarize(result.records);
    return result;
}

ExperimentResult run_external(const ExternalConfig& command, const Domain& dom, ExperimentConfig cfg) {
    cfg.external = command;
    cfg.external_domain = dom;
    cfg.require_oracle = false;
    cfg.oracle_path.clear();
    return run_experiment(cfg);
}

std::vector<GapSummary> summarize(std::vector<RunRecord> records) {
    std::stable_sort(records.begin(), records.end(), record_less);
    std::vector<GapSummary> out;
    for (const auto& rec : records) {
        if (out.empty() || out.back().method != rec.method) {
            out.emplace_back();
            out.back().method = rec.method;
        }
        auto& s = out.back();
        ++s.count;
        if (!rec.error.empty()) {
            ++s.failures;
            continue;
        }
        if (rec.f_at_x_hat) s.values.push_back(*rec.f_at_x_hat);
        if (rec.gap) {
            s.gaps.push_back(*rec.gap);
            s.log_gaps.push_back(std::log(*rec.gap + kLogGapFloor));
        }
    }
    for (auto& s : out) {
        const auto& base = s.gaps.empty() ? s.values : s.gaps;
        s.median = quantile(base, 0.5);
        s.q1 = quantile(base, 0.25);
        s.q3 = quantile(base, 0.75);
        s.median_log_gap = quantile(s.log_gaps, 0.5);
        s.median_value = quantile(s.values, 0.5);
    }
    return out;
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

}  // namespace

void write_records_jsonl(std::ostream& os, const std::vector<RunRecord>& records) {
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["method"] = to_string(r.method);
        j["seed"] = r.seed;
        j["function"] = r.function;
        j["lambda_int"] = r.lambda_int;
        j["x_hat"] = std::vector<double>(r.x_hat.data(), r.x_hat.data() + r.x_hat.size());
        j["f_at_x_hat"] = opt(r.f_at_x_hat);
        j["gap"] = opt(r.gap);
        j["xi"] = opt(r.xi);
        j["alpha_star"] = opt(r.alpha_star);
        j["branch"] = r.branch == Branch::none ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(to_string(r.branch));
        if (r.wall_ms) j["wall_ms"] = *r.wall_ms;
        if (!r.error.empty()) j["error"] = r.error;
        os << j.dump() << '\n';
    }
}

std::vector<RunRecord> read_records_jsonl(std::istream& is) {
    std::vector<RunRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw InvalidDataError("line " + std::to_string(lineno) + ": " + e.what());
        }
        RunRecord r;
        r.method = parse_method(j.at("method").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        r.function = j.value("function", std::string());
        r.lambda_int = j.value("lambda_int", 0.0);
        const auto xs = j.at("x_hat").get<std::vector<double>>();
        r.x_hat = Eigen::Map<const VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        r.f_at_x_hat = opt_from(j, "f_at_x_hat");
        r.gap = opt_from(j, "gap");
        r.xi = opt_from(j, "xi");
        r.alpha_star = opt_from(j, "alpha_star");
        const std::string br = j.contains("branch") && !j["branch"].is_null() ? j["branch"].get<std::string>() : "";
        r.branch = br == "tail" ? Branch::tail : br == "bomm" ? Branch::bomm : Branch::none;
        r.wall_ms = opt_from(j, "wall_ms");
        r.error = j.value("error", std::string());
        out.push_back(std::move(r));
    }
    return out;
}

void write_summary_csv(std::ostream& os, const std::vector<GapSummary>& summaries) {
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    os << "method,count,failures,median_gap,q1_gap,q3_gap,median_log_gap,median_f\n";
    for (const auto& s : summaries) {
        const bool gaps = !s.gaps.empty();
        os << to_string(s.method) << ',' << s.count << ',' << s.failures << ',' << (gaps ? num(s.median) : "") << ','
           << (gaps ? num(s.q1) : "") << ',' << (gaps ? num(s.q3) : "") << ',' << (gaps ? num(s.median_log_gap) : "")
           << ',' << num(s.median_value) << '\n';
    }
}

std::vector<BranchRate> run_nonadditivity_suite(const NonadditivityConfig& cfg) {
    std::vector<BranchRate> out;
    for (double lam : cfg.lambda_ints) {
        ExperimentConfig ec;
        ec.function = "custom_exp";
        ec.lambda_int = lam;
        ec.n = cfg.n;
        ec.methods = {Method::bomm_plus};
        ec.replications = cfg.replications;
        ec.seed = cfg.seed;
        ec.threads = cfg.threads;
        ec.require_oracle = false;
        ec.maximin_iters = cfg.maximin_iters;
        ec.fit = cfg.fit;
        ec.plus = cfg.plus;
        ExperimentResult res = run_experiment(ec);
        BranchRate br;
        br.lambda_int = lam;
        for (const auto& r : res.records) {
            if (!r.error.empty()) continue;
            ++br.replications;
            if (r.branch == Branch::tail) ++br.tail_count;
        }
        br.rate = br.replications ? static_cast<double>(br.tail_count) / static_cast<double>(br.replications) : 0.0;
        br.records = std::move(res.records);
        out.push_back(std::move(br));
    }
    return out;
}

void write_branch_rates_csv(std::ostream& os, const std::vector<BranchRate>& rates) {
    os << "lambda_int,replications,tail_branch,rate\n";
    for (const auto& r : rates)
        os << format_double(r.lambda_int) << ',' << r.replications << ',' << r.tail_count << ','
           << format_double(r.rate) << '\n';
}

}  // namespace bomm
