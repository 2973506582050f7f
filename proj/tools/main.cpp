// bomm: command-line front end for designs, fits, estimators and benchmarks.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bomm/batch.hpp"
#include "bomm/bench.hpp"
#include "bomm/design.hpp"
#include "bomm/estimators.hpp"
#include "bomm/io.hpp"
#include "bomm/marginal.hpp"
#include "bomm/testbed.hpp"
#include "json.hpp"

namespace {

using namespace bomm;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_double(item));
    return out;
}

/// Writes to the file, or stdout for "" and "-".
template <class F>
void with_output(const std::string& path, F&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    write(os);
}

nlohmann::ordered_json result_json(const EstimatorResult& r) {
    nlohmann::ordered_json j;
    j["method"] = to_string(r.method);
    j["x_hat"] = std::vector<double>(r.x_hat.data(), r.x_hat.data() + r.x_hat.size());
    j["f_at_x_hat"] = r.f_at_x_hat ? nlohmann::ordered_json(*r.f_at_x_hat) : nlohmann::ordered_json(nullptr);
    j["xi"] = r.xi ? nlohmann::ordered_json(*r.xi) : nlohmann::ordered_json(nullptr);
    j["alpha_star"] = r.alpha_star ? nlohmann::ordered_json(*r.alpha_star) : nlohmann::ordered_json(nullptr);
    j["branch"] = r.branch == Branch::none ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(to_string(r.branch));
    return j;
}

SurrogateKind parse_kind(const std::string& s) {
    if (s == "taag") return SurrogateKind::taag;
    if (s == "tag") return SurrogateKind::tag;
    if (s == "sqexp") return SurrogateKind::sqexp;
    throw ParameterError("unknown surrogate kind '" + s + "'");
}

struct DomainSource {
    std::string function;
    double lambda_int = 0.0;
    std::string domain_path;

    void add(CLI::App* app) {
        app->add_option("--function", function, "Test function supplying the domain");
        app->add_option("--lambda-int", lambda_int, "Interaction strength for custom_exp");
        app->add_option("--domain", domain_path, "Domain JSON {\"lower\": [...], \"upper\": [...]}");
    }
    Domain get() const {
        if (!domain_path.empty()) return load_domain(domain_path);
        if (!function.empty()) return make_test_function(function, lambda_int).domain;
        throw ParameterError("pass --function or --domain");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian optimization via marginal means"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Print warnings to stderr");

    // design
    auto* design = app.add_subcommand("design", "Maximin Latin hypercube design");
    std::size_t design_n = 0, design_d = 0, design_iters = 0;
    std::uint64_t design_seed = 1;
    bool design_random = false;
    std::string design_out;
    DomainSource design_dom;
    design->add_option("--n", design_n, "Number of points")->required();
    design->add_option("--d", design_d, "Dimension (defaults to the domain's)");
    design->add_option("--iters", design_iters, "Swap iterations (default 10000 * d)");
    design->add_option("--seed", design_seed);
    design->add_flag("--random", design_random, "Plain random LHD, no maximin search");
    design->add_option("--out", design_out, "Output CSV (default stdout)");
    design_dom.add(design);

    // eval
    auto* evalc = app.add_subcommand("eval", "Evaluate a test function on a design");
    std::string eval_fn, eval_in, eval_out;
    double eval_lambda = 0.0;
    evalc->add_option("--function", eval_fn)->required();
    evalc->add_option("--lambda-int", eval_lambda);
    bool eval_stdin = false, eval_serve = false;
    evalc->add_option("--in", eval_in, "Design CSV");
    evalc->add_option("--out", eval_out, "Dataset CSV (default stdout)");
    evalc->add_flag("--stdin", eval_stdin, "Read x1,...,xd lines from stdin, print one value per line");
    evalc->add_flag("--serve", eval_serve, "Answer 'EVAL x1,...,xd' lines with 'OK value'");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Reference minimum by random search and refinement");
    std::string oracle_fn, oracle_fixture = BOMM_DEFAULT_ORACLE;
    double oracle_lambda = 0.0;
    OracleConfig oracle_cfg;
    oracle->add_option("--function", oracle_fn)->required();
    oracle->add_option("--lambda-int", oracle_lambda);
    oracle->add_option("--budget", oracle_cfg.budget);
    oracle->add_option("--seed", oracle_cfg.seed);
    oracle->add_option("--fixture", oracle_fixture, "Fixture file to update");

    // fit
    auto* fitc = app.add_subcommand("fit", "Fit the surrogate and print its parameters as JSON");
    std::string fit_data, fit_kind = "taag", fit_out;
    std::uint64_t fit_seed = 1;
    DomainSource fit_dom;
    fitc->add_option("--data", fit_data, "Dataset CSV")->required();
    fitc->add_option("--kind", fit_kind, "taag, tag or sqexp");
    fitc->add_option("--seed", fit_seed);
    fitc->add_option("--out", fit_out);
    fit_dom.add(fitc);

    // optimize
    auto* opt = app.add_subcommand("optimize", "Estimate the minimiser from a dataset");
    std::string opt_data, opt_method = "bomm-plus", opt_trace, opt_out;
    std::uint64_t opt_seed = 1;
    double opt_alpha = 0.0;
    DomainSource opt_dom;
    opt->add_option("--data", opt_data, "Dataset CSV")->required();
    opt->add_option("--method", opt_method, "pw, sbo-sqexp, sbo-taag, sbo-tag, bomm, bomm-tail, bomm-plus");
    opt->add_option("--alpha", opt_alpha, "Tail fraction for bomm-tail (default: selected)");
    opt->add_option("--seed", opt_seed);
    opt->add_option("--trace", opt_trace, "CSV of marginal profiles");
    opt->add_option("--out", opt_out);
    opt_dom.add(opt);

    // bench
    auto* bench = app.add_subcommand("bench", "Replicated one-shot benchmark");
    ExperimentConfig bcfg;
    bcfg.oracle_path = BOMM_DEFAULT_ORACLE;
    std::string bench_methods = "pw,sbo-sqexp,sbo-taag,sbo-tag,bomm-plus", bench_out, bench_summary;
    std::string ext_cmd, ext_domain;
    bool ext_persistent = false;
    double ext_timeout = 3600.0;
    bench->add_option("--function", bcfg.function);
    bench->add_option("--lambda-int", bcfg.lambda_int);
    bench->add_option("--n", bcfg.n, "Sample size (default 10 * d)");
    bench->add_option("--reps", bcfg.replications);
    bench->add_option("--methods", bench_methods);
    bench->add_option("--seed", bcfg.seed);
    bench->add_option("--threads", bcfg.threads);
    bench->add_option("--oracle", bcfg.oracle_path, "Reference minima fixture");
    bench->add_flag("--timing", bcfg.timing, "Record wall_ms per method");
    bench->add_option("--out", bench_out, "JSON-lines records (default stdout)");
    bench->add_option("--summary", bench_summary, "Per-method CSV summary");
    bench->add_option("--external", ext_cmd, "Shell command evaluating the objective");
    bench->add_option("--domain", ext_domain, "Domain JSON for --external");
    bench->add_flag("--persistent", ext_persistent, "Keep one external process (EVAL/OK protocol)");
    bench->add_option("--timeout", ext_timeout, "Seconds per external evaluation");

    // nonadd
    auto* nonadd = app.add_subcommand("nonadd", "Branch rates of the non-additivity diagnostic on custom_exp");
    NonadditivityConfig ncfg;
    std::string nonadd_lambdas = "0.05,0.3,0.5", nonadd_out, nonadd_records;
    nonadd->add_option("--lambdas", nonadd_lambdas);
    nonadd->add_option("--n", ncfg.n);
    nonadd->add_option("--reps", ncfg.replications);
    nonadd->add_option("--seed", ncfg.seed);
    nonadd->add_option("--threads", ncfg.threads);
    nonadd->add_option("--out", nonadd_out, "CSV table (default stdout)");
    nonadd->add_option("--records", nonadd_records, "JSON-lines records");

    // batch
    auto* batch = app.add_subcommand("batch", "Batch-sequential run");
    BatchConfig batch_cfg;
    std::string batch_fn, batch_method = "bomm-plus", batch_out;
    double batch_lambda = 0.0;
    std::uint64_t batch_seed = 1;
    batch->add_option("--function", batch_fn)->required();
    batch->add_option("--lambda-int", batch_lambda);
    batch->add_option("--n-ini", batch_cfg.n_ini);
    batch->add_option("--b", batch_cfg.batch_size);
    batch->add_option("--budget", batch_cfg.budget);
    batch->add_option("--method", batch_method, "bomm-plus or ei");
    batch->add_option("--seed", batch_seed);
    batch->add_option("--out", batch_out, "JSON-lines trajectory (default stdout)");

    // summarize
    auto* summ = app.add_subcommand("summarize", "Per-method quartiles from JSON-lines records");
    std::string summ_in, summ_format = "csv", summ_out;
    summ->add_option("input", summ_in)->required();
    summ->add_option("--format", summ_format)->check(CLI::IsMember({"csv"}));
    summ->add_option("--out", summ_out);

    CLI11_PARSE(app, argc, argv);
    if (verbose) setenv("BOMM_VERBOSE", "1", 1);

    try {
        if (*design) {
            Domain dom = (design_dom.function.empty() && design_dom.domain_path.empty())
                             ? Domain::unit(design_d)
                             : design_dom.get();
            if (design_d != 0 && design_d != dom.dims()) throw ParameterError("--d disagrees with the domain");
            LhdConfig cfg = LhdConfig::defaults(design_n, dom.dims());
            if (design_iters) cfg.maximin_iters = design_iters;
            Rng rng(design_seed, 0);
            const MatrixXd U = design_random ? random_lhd(design_n, dom.dims(), rng) : maximin_lhd(cfg, rng);
            with_output(design_out, [&](std::ostream& os) { write_design_csv(os, unscale_rows_from_unit(U, dom)); });
        } else if (*evalc) {
            const TestFunction f = make_test_function(eval_fn, eval_lambda);
            if (eval_stdin || eval_serve) {
                std::string line;
                while (std::getline(std::cin, line)) {
                    if (line.empty()) continue;
                    if (eval_serve) {
                        if (line.rfind("EVAL ", 0) != 0) throw Error("expected 'EVAL x1,...', got '" + line + "'");
                        line.erase(0, 5);
                    }
                    const auto v = parse_list(line);
                    const double y = f(VectorXd::Map(v.data(), static_cast<Eigen::Index>(v.size())));
                    std::cout << (eval_serve ? "OK " : "") << format_double(y) << std::endl;
                }
                return 0;
            }
            if (eval_in.empty()) throw ParameterError("eval needs --in, --stdin or --serve");
            std::ifstream is(eval_in);
            if (!is) throw Error("cannot open " + eval_in);
            const MatrixXd X = read_design_csv(is);
            VectorXd y(X.rows());
            for (Eigen::Index i = 0; i < X.rows(); ++i) y[i] = f(X.row(i).transpose());
            const Dataset data(DesignMatrix(X), y);
            data.design().check_within(f.domain);
            with_output(eval_out, [&](std::ostream& os) { write_dataset_csv(os, data); });
        } else if (*oracle) {
            const TestFunction f = make_test_function(oracle_fn, oracle_lambda);
            const OracleResult r = oracle_minimize(f, oracle_cfg);
            std::vector<OracleResult> entries;
            if (std::ifstream(oracle_fixture).good()) entries = load_oracle_fixtures(oracle_fixture);
            upsert_oracle_fixture(entries, r);
            save_oracle_fixtures(oracle_fixture, entries);
            std::cout << oracle_fn << " f_opt=" << format_double(r.f_opt) << '\n';
        } else if (*fitc) {
            const Domain dom = fit_dom.get();
            FitConfig cfg;
            cfg.kind = parse_kind(fit_kind);
            Rng rng(fit_seed, 0);
            const FittedTaag model = fit(load_dataset(fit_data), dom, cfg, rng);
            with_output(fit_out, [&](std::ostream& os) { os << model_to_json(model) << '\n'; });
        } else if (*opt) {
            const Domain dom = opt_dom.get();
            const Dataset data = load_dataset(opt_data);
            const Method m = parse_method(opt_method);
            Rng rng(opt_seed, 0);
            EstimatorResult r;
            if (m == Method::pw) {
                r = pick_the_winner(data);
            } else {
                FitConfig cfg;
                cfg.kind = m == Method::sbo_sqexp ? SurrogateKind::sqexp
                           : m == Method::sbo_tag ? SurrogateKind::tag
                                                  : SurrogateKind::taag;
                Rng fit_rng = rng.split(1);
                const FittedTaag model = fit(data, dom, cfg, fit_rng);
                Rng est_rng = rng.split(2);
                PlusConfig plus;
                switch (m) {
                    case Method::bomm: r = bomm::bomm(model); break;
                    case Method::bomm_tail:
                        r = bomm_tail(model, opt_alpha > 0.0 ? opt_alpha : select_alpha(model, plus.alpha_grid));
                        break;
                    case Method::bomm_plus: r = bomm_plus(model, plus, est_rng); break;
                    default: r = sbo_optimize(model, SearchConfig{}, est_rng); break;
                }
                if (!opt_trace.empty()) {
                    std::ofstream ts(opt_trace);
                    write_marginal_trace(ts, marginal_posteriors(model), r.alpha_star.value_or(1.0));
                }
            }
            with_output(opt_out, [&](std::ostream& os) { os << result_json(r).dump(2) << '\n'; });
        } else if (*bench) {
            bcfg.methods = parse_methods(bench_methods);
            ExperimentResult res;
            if (!ext_cmd.empty()) {
                if (ext_domain.empty()) throw ParameterError("--external needs --domain");
                res = run_external(ExternalConfig{ext_cmd, ext_persistent, ext_timeout}, load_domain(ext_domain), bcfg);
            } else {
                res = run_experiment(bcfg);
            }
            with_output(bench_out, [&](std::ostream& os) { write_records_jsonl(os, res.records); });
            if (!bench_summary.empty())
                with_output(bench_summary, [&](std::ostream& os) { write_summary_csv(os, res.summaries); });
        } else if (*nonadd) {
            ncfg.lambda_ints = parse_list(nonadd_lambdas);
            const auto rates = run_nonadditivity_suite(ncfg);
            with_output(nonadd_out, [&](std::ostream& os) { write_branch_rates_csv(os, rates); });
            if (!nonadd_records.empty()) {
                std::vector<RunRecord> all;
                for (const auto& r : rates) all.insert(all.end(), r.records.begin(), r.records.end());
                with_output(nonadd_records, [&](std::ostream& os) { write_records_jsonl(os, all); });
            }
        } else if (*batch) {
            const TestFunction f = make_test_function(batch_fn, batch_lambda);
            Rng rng(batch_seed, 0);
            const BatchTrajectory t = batch_method == "ei" ? batch_ei(f.eval, f.domain, batch_cfg, rng)
                                                           : batch_bomm_plus(f.eval, f.domain, batch_cfg, rng);
            with_output(batch_out, [&](std::ostream& os) {
                for (const auto& s : t.steps) {
                    nlohmann::ordered_json j;
                    j["iteration"] = s.iteration;
                    j["n_before"] = s.n_before;
                    j["evaluations"] = s.evaluations;
                    j["best_observed"] = s.best_observed;
                    j["estimate"] = result_json(s.estimate);
                    os << j.dump() << '\n';
                }
                if (t.final_estimate) {
                    nlohmann::ordered_json j;
                    j["final"] = result_json(*t.final_estimate);
                    j["f_at_x_hat"] = f(t.final_estimate->x_hat);
                    j["evaluations"] = t.evaluations;
                    os << j.dump() << '\n';
                }
            });
            if (t.aborted) {
                std::cerr << "bomm: batch aborted: " << t.error << '\n';
                return 2;
            }
        } else if (*summ) {
            std::ifstream is(summ_in);
            if (!is) throw Error("cannot open " + summ_in);
            const auto summaries = summarize(read_records_jsonl(is));
            with_output(summ_out, [&](std::ostream& os) { write_summary_csv(os, summaries); });
        }
    } catch (const std::exception& e) {
        std::cerr << "bomm: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
