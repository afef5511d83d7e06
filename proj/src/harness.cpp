#include "cmdp/harness.hpp"

#include "cmdp/errors.hpp"
#include "cmdp/estimation.hpp"
#include "cmdp/evaluation.hpp"
#include "cmdp/oracle.hpp"
#include "cmdp/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace cmdp {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T> T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
    }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw ConfigError("'" + std::string(key) + "' in " + where + " must be a number");
    return obj.at(key).get<double>();
}

int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw ConfigError("'" + std::string(key) + "' in " + where + " must be an integer");
    return obj.at(key).get<int>();
}

std::uint64_t get_seed(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) throw ConfigError(where + " must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

EnvSpec parse_env(const json& j) {
    require_keys(j, "env", {"kind", "gamma", "b", "b_fraction", "rho", "n_states", "n_actions", "seed"});
    EnvSpec e;
    const auto kind = get_or<std::string>(j, "kind", "gridworld", "env");
    if (kind == "gridworld")
        e.kind = EnvSpec::Kind::gridworld;
    else if (kind == "random")
        e.kind = EnvSpec::Kind::random;
    else
        throw ConfigError("env.kind must be 'gridworld' or 'random'");
    e.gamma = get_number(j, "gamma", e.gamma, "env");
    if (!(e.gamma >= 0.0 && e.gamma < 1.0)) throw ConfigError("env.gamma must be in [0, 1)");
    if (j.contains("b") && !j.at("b").is_null()) e.b = get_number(j, "b", 0.0, "env");
    e.b_fraction = get_number(j, "b_fraction", e.b_fraction, "env");
    if (j.contains("rho")) {
        const json& r = j.at("rho");
        if (r.is_string()) {
            if (r.get<std::string>() != "uniform") throw ConfigError("env.rho string must be 'uniform'");
        } else if (r.is_object()) {
            require_keys(r, "env.rho", {"point"});
            e.rho_kind = "point";
            e.rho_states = get_or<std::vector<int>>(r, "point", {}, "env.rho");
        } else if (r.is_array()) {
            e.rho_kind = "custom";
            e.rho_custom = get_or<std::vector<double>>(j, "rho", {}, "env");
        } else {
            throw ConfigError("env.rho must be 'uniform', {\"point\": [...]} or an array");
        }
    }
    e.n_states = get_int(j, "n_states", e.n_states, "env");
    e.n_actions = get_int(j, "n_actions", e.n_actions, "env");
    if (j.contains("seed")) e.seed = get_seed(j.at("seed"), "env.seed");
    if (e.n_states < 1 || e.n_actions < 1) throw ConfigError("env sizes must be positive");
    return e;
}

void parse_hyper(const json& j, SolverConfig& s) {
    require_keys(j, "hyper", {"alpha_pi", "alpha_lambda", "crpo_eta", "nu_ent", "lambda0", "anytime_steps"});
    s.alpha_pi = get_number(j, "alpha_pi", s.alpha_pi, "hyper");
    s.alpha_lambda = get_number(j, "alpha_lambda", s.alpha_lambda, "hyper");
    s.crpo_eta = get_number(j, "crpo_eta", s.crpo_eta, "hyper");
    s.nu_ent = get_number(j, "nu_ent", s.nu_ent, "hyper");
    s.lambda0 = get_number(j, "lambda0", s.lambda0, "hyper");
    s.anytime_steps = get_or<bool>(j, "anytime_steps", s.anytime_steps, "hyper");
}

EstimatorSpec parse_estimator(const json& j) {
    require_keys(j, "estimator", {"kind", "m", "eps_trunc", "delta", "fit_nu"});
    EstimatorSpec e;
    const auto kind = get_or<std::string>(j, "kind", "exact", "estimator");
    if (kind == "exact")
        e.kind = EstimatorSpec::Kind::exact;
    else if (kind == "monte_carlo")
        e.kind = EstimatorSpec::Kind::monte_carlo;
    else
        throw ConfigError("estimator.kind must be 'exact' or 'monte_carlo'");
    e.m = get_int(j, "m", e.m, "estimator");
    e.eps_trunc = get_number(j, "eps_trunc", e.eps_trunc, "estimator");
    e.delta = get_number(j, "delta", e.delta, "estimator");
    e.fit_nu = get_number(j, "fit_nu", e.fit_nu, "estimator");
    if (e.fit_nu < 0.0) throw ConfigError("estimator.fit_nu must be nonnegative");
    if (e.m < 1) throw ConfigError("estimator.m must be at least 1");
    if (!(e.eps_trunc > 0.0)) throw ConfigError("estimator.eps_trunc must be positive");
    if (!(e.delta > 0.0 && e.delta < 1.0)) throw ConfigError("estimator.delta must be in (0, 1)");
    return e;
}

FeatureSpec parse_features(const json& j) {
    require_keys(j, "features", {"kind", "tile_size", "n_tilings", "offsets", "dim", "seed"});
    FeatureSpec f;
    const auto kind = get_or<std::string>(j, "kind", "one_hot", "features");
    if (kind == "one_hot")
        f.kind = FeatureSpec::Kind::one_hot;
    else if (kind == "tile_coding")
        f.kind = FeatureSpec::Kind::tile_coding;
    else if (kind == "random")
        f.kind = FeatureSpec::Kind::random;
    else
        throw ConfigError("features.kind must be 'one_hot', 'tile_coding' or 'random'");
    f.tile_size = get_or<std::array<int, 2>>(j, "tile_size", f.tile_size, "features");
    f.n_tilings = get_int(j, "n_tilings", f.n_tilings, "features");
    f.offsets = get_or<std::vector<std::array<int, 2>>>(j, "offsets", {}, "features");
    f.dim = get_int(j, "dim", f.dim, "features");
    if (j.contains("seed")) f.seed = get_seed(j.at("seed"), "features.seed");
    return f;
}

CoresetSpec parse_coreset(const json& j) {
    CoresetSpec c;
    if (j.is_string()) {
        if (j.get<std::string>() != "full") throw ConfigError("coreset string must be 'full'");
        return c;
    }
    require_keys(j, "coreset", {"eps_prime", "nu"});
    c.full = false;
    c.eps_prime = get_number(j, "eps_prime", c.eps_prime, "coreset");
    c.nu = get_number(j, "nu", c.nu, "coreset");
    if (!(c.eps_prime > 0.0)) throw ConfigError("coreset.eps_prime must be positive");
    if (!(c.nu > 0.0)) throw ConfigError("coreset.nu must be positive");
    return c;
}

const std::set<std::string>& sweepable() {
    static const std::set<std::string> names{"alpha_pi", "alpha_lambda", "crpo_eta", "nu_ent", "lambda0"};
    return names;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::pair<double, double> mean_ci95(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (xs.size() - 1));
    return {mean, 1.96 * sd / std::sqrt(static_cast<double>(xs.size()))};
}

} // namespace

ExperimentConfig parse_config(const json& doc) {
    require_keys(doc, "config",
                 {"env", "algorithm", "hyper", "estimator", "features", "coreset", "T", "seeds", "output", "sweep",
                  "feasibility_iterations", "visited_only", "u"});
    ExperimentConfig c;
    c.source = doc;
    if (doc.contains("env")) c.env = parse_env(doc.at("env"));
    try {
        c.solver.algorithm = algorithm_from_string(get_or<std::string>(doc, "algorithm", "cbp_practical", "config"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (doc.contains("hyper")) parse_hyper(doc.at("hyper"), c.solver);
    if (doc.contains("estimator")) c.estimator = parse_estimator(doc.at("estimator"));
    if (doc.contains("features")) c.features = parse_features(doc.at("features"));
    if (doc.contains("coreset")) c.coreset = parse_coreset(doc.at("coreset"));
    c.solver.T = get_int(doc, "T", c.solver.T, "config");
    if (c.solver.T < 0) throw ConfigError("T must be nonnegative");
    c.solver.feasibility_iterations =
        get_int(doc, "feasibility_iterations", c.solver.feasibility_iterations, "config");
    if (c.solver.feasibility_iterations < 1) throw ConfigError("feasibility_iterations must be at least 1");
    c.solver.visited_only = get_or<bool>(doc, "visited_only", false, "config");
    if (doc.contains("u") && !doc.at("u").is_null()) {
        c.solver.upper_override = get_number(doc, "u", 0.0, "config");
        if (!(*c.solver.upper_override > 0.0)) throw ConfigError("u must be positive");
    }
    if (doc.contains("seeds")) {
        const json& s = doc.at("seeds");
        if (!s.is_array() || s.empty()) throw ConfigError("seeds must be a non-empty array");
        c.seeds.clear();
        for (const json& v : s) c.seeds.push_back(get_seed(v, "seeds entry"));
    }
    c.output = get_or<std::string>(doc, "output", c.output, "config");
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        if (!s.is_object()) throw ConfigError("sweep must be an object of hyperparameter lists");
        for (const auto& [name, values] : s.items()) {
            if (!sweepable().count(name)) throw ConfigError("unknown key '" + name + "' in sweep");
            if (!values.is_array() || values.empty()) throw ConfigError("sweep." + name + " must be a non-empty array");
            SweepAxis axis{name, {}};
            for (const json& v : values) {
                if (!v.is_number()) throw ConfigError("sweep." + name + " entries must be numbers");
                axis.values.push_back(v.get<double>());
            }
            c.sweep.push_back(std::move(axis));
        }
    }
    if (c.solver.alpha_pi < 0.0 || c.solver.alpha_lambda < 0.0 || c.solver.nu_ent < 0.0 || c.solver.lambda0 < 0.0)
        throw ConfigError("hyperparameters must be nonnegative");
    if (c.solver.algorithm == Algorithm::cbp_practical && !(c.solver.alpha_lambda > 0.0))
        throw ConfigError("alpha_lambda must be positive for cbp_practical");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

std::string config_hash(const json& doc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : doc.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FeatureMap make_features(const ExperimentConfig& config, const TabularCmdp& cmdp) {
    const FeatureSpec& f = config.features;
    switch (f.kind) {
    case FeatureSpec::Kind::one_hot:
        return build_one_hot(cmdp.n_states(), cmdp.n_actions());
    case FeatureSpec::Kind::tile_coding: {
        if (config.env.kind != EnvSpec::Kind::gridworld) throw ConfigError("tile coding needs the gridworld");
        TileCodingParams p;
        p.grid = {gridworld::rows, gridworld::cols};
        p.n_actions = cmdp.n_actions();
        p.tile_size = f.tile_size;
        p.n_tilings = f.n_tilings;
        p.offsets = f.offsets;
        try {
            return build_tile_coding(p);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    case FeatureSpec::Kind::random:
        if (f.dim < 1) throw ConfigError("features.dim must be positive");
        return build_random_features(cmdp.n_states(), cmdp.n_actions(), f.dim, f.seed);
    }
    throw ConfigError("unknown feature kind");
}

Coreset make_coreset(const ExperimentConfig& config, const FeatureMap& features) {
    if (config.coreset.full) return full_coreset(features, config.coreset.nu);
    return build_coreset(features, config.coreset.eps_prime, config.coreset.nu);
}

RunContext make_context(const ExperimentConfig& config) {
    RunContext ctx;
    try {
        ctx.cmdp = std::make_shared<const TabularCmdp>(make_env(config.env));
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("environment: ") + e.what());
    }
    if (config.estimator.kind == EstimatorSpec::Kind::monte_carlo) {
        ctx.features = std::make_shared<const FeatureMap>(make_features(config, *ctx.cmdp));
        ctx.coreset = std::make_shared<const Coreset>(make_coreset(config, *ctx.features));
    }
    return ctx;
}

QEstimator make_estimator(const ExperimentConfig& config, const RunContext& context, std::uint64_t seed) {
    if (config.estimator.kind == EstimatorSpec::Kind::exact) {
        auto cmdp = context.cmdp;
        return [cmdp](const Policy& policy, std::uint64_t) {
            QTables t = exact_estimator(*cmdp, policy);
            return EstimatorOutput{std::move(t.q_r), std::move(t.q_c), {}};
        };
    }
    if (!context.features || !context.coreset) throw ConfigError("sampled estimator needs features and a coreset");
    const int horizon = horizon_for(config.estimator.eps_trunc, context.cmdp->gamma());
    const int m = config.estimator.m;
    const double nu = config.estimator.fit_nu;
    const bool visits = config.solver.visited_only;
    return [context, horizon, m, nu, seed, visits](const Policy& policy, std::uint64_t stream) {
        const RolloutEstimates roll = rollout_q_estimates(*context.cmdp, policy, *context.coreset, m, horizon,
                                                          derive_seed(seed, {stream}), visits);
        QEstimate est;
        est.features = context.features;
        est.theta_r = wls_fit(*context.coreset, *context.features, roll.q_r, nu);
        est.theta_c = wls_fit(*context.coreset, *context.features, roll.q_c, nu);
        auto [q_r, q_c] = predict_tables(est);
        return EstimatorOutput{std::move(q_r), std::move(q_c), roll.visited};
    };
}

std::string format_csv(const ExperimentConfig& config, const IterateLog& log, std::uint64_t seed,
                       const std::vector<std::pair<std::string, std::string>>& extra_header) {
    std::ostringstream out;
    out << "# config_hash=" << config_hash(config.source) << '\n';
    out << "# algorithm=" << to_string(config.solver.algorithm) << '\n';
    out << "# seed=" << seed << '\n';
    for (const auto& [k, v] : extra_header) out << "# " << k << '=' << v << '\n';
    out << "# T=" << config.solver.T << '\n';
    out << "# U=" << fmt_double(log.upper) << '\n';
    out << "# zeta_hat=" << fmt_double(log.zeta_hat) << '\n';
    out << "# eta1=" << fmt_double(log.eta1) << '\n';
    out << "# eta2=" << fmt_double(log.eta2) << '\n';
    out << "# alpha_pi=" << fmt_double(config.solver.alpha_pi) << '\n';
    out << "# alpha_lambda=" << fmt_double(config.solver.alpha_lambda) << '\n';
    out << "# crpo_eta=" << fmt_double(config.solver.crpo_eta) << '\n';
    out << "# nu_ent=" << fmt_double(config.solver.nu_ent) << '\n';
    out << "# b=" << fmt_double(log.b) << '\n';
    out << "# J_r_star=" << fmt_double(log.j_r_star) << '\n';
    if (log.boundary) out << "# boundary=1\n";
    out << "iter,J_r,J_c,est_Jc,lambda,og_running,cv_running,primal_regret_running,dual_regret_at_0,"
           "dual_regret_at_U\n";
    for (const IterateRecord& r : log.records) {
        out << r.iter << ',' << fmt_double(r.j_r) << ',' << fmt_double(r.j_c) << ',' << fmt_double(r.est_jc) << ','
            << fmt_double(r.lambda) << ',' << fmt_double(r.og_running) << ',' << fmt_double(r.cv_running) << ','
            << fmt_double(r.primal_regret_running) << ',' << fmt_double(r.dual_regret_at_0) << ','
            << fmt_double(r.dual_regret_at_u) << '\n';
    }
    return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed, const std::filesystem::path& csv,
                                const RunContext* context) {
    const RunContext owned = context ? RunContext{} : make_context(config);
    const RunContext& ctx = context ? *context : owned;
    SolverConfig solver = config.solver;
    solver.seed = seed;
    ExperimentResult res;
    res.seed = seed;
    res.log = run_algorithm(*ctx.cmdp, solver, make_estimator(config, ctx, seed));
    if (!csv.empty()) {
        write_text(csv, format_csv(config, res.log, seed));
        res.csv = csv;
    }
    return res;
}

double SweepResult::og_spread() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const CellSummary& c : cells)
        if (c.status == "ok") {
            lo = std::min(lo, c.og_mean);
            hi = std::max(hi, c.og_mean);
        }
    return hi >= lo ? hi - lo : 0.0;
}

std::vector<std::vector<std::pair<std::string, double>>> sweep_cells(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<std::pair<std::string, double>>> cells{{}};
    for (const SweepAxis& axis : axes) {
        std::vector<std::vector<std::pair<std::string, double>>> next;
        for (const auto& cell : cells)
            for (double v : axis.values) {
                auto c = cell;
                c.emplace_back(axis.name, v);
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }
    return cells;
}

SolverConfig apply_cell(SolverConfig base, const std::vector<std::pair<std::string, double>>& cell) {
    for (const auto& [name, v] : cell) {
        if (name == "alpha_pi")
            base.alpha_pi = v;
        else if (name == "alpha_lambda")
            base.alpha_lambda = v;
        else if (name == "crpo_eta")
            base.crpo_eta = v;
        else if (name == "nu_ent")
            base.nu_ent = v;
        else if (name == "lambda0")
            base.lambda0 = v;
        else
            throw ConfigError("unknown sweep parameter " + name);
    }
    return base;
}

std::uint64_t cell_seed(std::uint64_t master, int cell) {
    return derive_seed(master, {static_cast<std::uint64_t>(cell)});
}

int select_best_cell(const std::vector<CellSummary>& cells, double cv_low, double cv_high) {
    int best = -1;
    for (const CellSummary& c : cells) {
        if (c.status != "ok" || c.signed_cv_mean < cv_low || c.signed_cv_mean > cv_high) continue;
        if (best < 0 || c.og_mean < cells[best].og_mean) best = c.index;
    }
    return best;
}

SweepResult run_sweep(const ExperimentConfig& config, int jobs, bool write_files) {
    if (jobs < 1) throw ConfigError("--jobs must be at least 1");
    const auto cells = sweep_cells(config.sweep);
    const RunContext ctx = make_context(config);
    const std::filesystem::path dir(config.output);

    struct Outcome {
        bool ok = false;
        std::string error;
        double og = 0.0;
        double cv = 0.0;
        double signed_cv = 0.0;
    };
    const std::size_t n_seeds = config.seeds.size();
    const std::size_t n_tasks = cells.size() * n_seeds;
    std::vector<Outcome> outcomes(n_tasks);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t task = next++; task < n_tasks; task = next++) {
            const int cell = static_cast<int>(task / n_seeds);
            const std::uint64_t master = config.seeds[task % n_seeds];
            const std::uint64_t seed = cell_seed(master, cell);
            Outcome& out = outcomes[task];
            try {
                ExperimentConfig cfg = config;
                cfg.solver = apply_cell(config.solver, cells[cell]);
                SolverConfig solver = cfg.solver;
                solver.seed = seed;
                const IterateLog log = run_algorithm(*ctx.cmdp, solver, make_estimator(cfg, ctx, seed));
                if (write_files) {
                    char name[64];
                    std::snprintf(name, sizeof name, "cell%03d_seed%llu.csv", cell,
                                  static_cast<unsigned long long>(master));
                    std::vector<std::pair<std::string, std::string>> extra{
                        {"master_seed", std::to_string(master)},
                        {"cell", std::to_string(cell)},
                        {"seeding", "derive_seed(master_seed, {cell})"}};
                    write_text(dir / name, format_csv(cfg, log, seed, extra));
                }
                if (log.records.empty()) {
                    out.ok = true;
                    continue;
                }
                const IterateRecord& last = log.records.back();
                double sum_v = 0.0;
                for (const IterateRecord& r : log.records) sum_v += log.b - r.j_c;
                out.og = last.og_running;
                out.cv = last.cv_running;
                out.signed_cv = sum_v / log.records.size();
                out.ok = true;
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };
    const int n_threads = static_cast<int>(std::min<std::size_t>(jobs, std::max<std::size_t>(n_tasks, 1)));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    SweepResult result;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellSummary s;
        s.index = static_cast<int>(c);
        s.params = cells[c];
        std::vector<double> og, cv, scv;
        for (std::size_t k = 0; k < n_seeds; ++k) {
            const Outcome& o = outcomes[c * n_seeds + k];
            if (!o.ok) {
                s.status = "failed";
                if (s.message.empty()) s.message = o.error;
                continue;
            }
            og.push_back(o.og);
            cv.push_back(o.cv);
            scv.push_back(o.signed_cv);
        }
        s.n_seeds = static_cast<int>(og.size());
        std::tie(s.og_mean, s.og_ci95) = mean_ci95(og);
        s.cv_mean = mean_ci95(cv).first;
        std::tie(s.signed_cv_mean, s.signed_cv_ci95) = mean_ci95(scv);
        result.cells.push_back(std::move(s));
    }
    result.best_cell = select_best_cell(result.cells);

    if (write_files) {
        std::ostringstream out;
        out << "# config_hash=" << config_hash(config.source) << '\n';
        out << "# algorithm=" << to_string(config.solver.algorithm) << '\n';
        out << "# best_cell=" << result.best_cell << '\n';
        out << "# og_spread=" << fmt_double(result.og_spread()) << '\n';
        out << "# ci=mean +- 1.96*stderr over seeds\n";
        out << "cell";
        for (const SweepAxis& a : config.sweep) out << ',' << a.name;
        out << ",status,n_seeds,og_mean,og_ci95,cv_mean,signed_cv_mean,signed_cv_ci95,message\n";
        for (const CellSummary& s : result.cells) {
            out << s.index;
            for (const auto& [_, v] : s.params) out << ',' << fmt_double(v);
            std::string msg = s.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out << ',' << s.status << ',' << s.n_seeds << ',' << fmt_double(s.og_mean) << ','
                << fmt_double(s.og_ci95) << ',' << fmt_double(s.cv_mean) << ',' << fmt_double(s.signed_cv_mean)
                << ',' << fmt_double(s.signed_cv_ci95) << ',' << msg << '\n';
        }
        result.summary_csv = dir / "summary.csv";
        write_text(result.summary_csv, out.str());
    }
    return result;
}

std::string report_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().filename() == "summary.csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::ostringstream out;
    if (files.empty()) {
        out << "no summary.csv under " << dir.string() << '\n';
        return out.str();
    }
    for (const auto& path : files) {
        std::ifstream in(path);
        std::string line;
        std::string algorithm = "?";
        int best = -1;
        std::vector<std::string> columns;
        std::vector<std::vector<std::string>> rows;
        while (std::getline(in, line)) {
            if (line.rfind("# algorithm=", 0) == 0) algorithm = line.substr(12);
            if (line.rfind("# best_cell=", 0) == 0) best = std::stoi(line.substr(12));
            if (line.empty() || line[0] == '#') continue;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string f;
            while (std::getline(ss, f, ',')) fields.push_back(f);
            if (columns.empty())
                columns = std::move(fields);
            else
                rows.push_back(std::move(fields));
        }
        auto col = [&](const std::string& name) {
            const auto it = std::find(columns.begin(), columns.end(), name);
            return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
        };
        const int og_col = col("og_mean");
        const int status_col = col("status");
        const int scv_col = col("signed_cv_mean");
        const int param_end = status_col;
        out << path.string() << " (" << algorithm << ", " << rows.size() << " cells)\n";
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        int failed = 0;
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) <= std::max(og_col, scv_col) || og_col < 0 || status_col < 0) continue;
            if (r[status_col] != "ok") {
                ++failed;
                continue;
            }
            const double og = std::stod(r[og_col]);
            lo = std::min(lo, og);
            hi = std::max(hi, og);
        }
        out << "  failed cells: " << failed << '\n';
        if (hi >= lo) out << "  final OG range: [" << fmt_double(lo) << ", " << fmt_double(hi) << "], spread "
                          << fmt_double(hi - lo) << '\n';
        if (best >= 0 && best < static_cast<int>(rows.size())) {
            const auto& r = rows[best];
            out << "  best cell " << best << ':';
            for (int k = 1; k < param_end; ++k) out << ' ' << columns[k] << '=' << r[k];
            out << " OG=" << r[og_col] << " signed CV=" << r[scv_col] << '\n';
        } else {
            out << "  best cell: none with signed CV in [-0.25, 0]\n";
        }
    }
    return out.str();
}

json oracle_report(const ExperimentConfig& config) {
    const RunContext ctx = make_context(config);
    const TabularCmdp& cmdp = *ctx.cmdp;
    json out;
    out["b"] = cmdp.threshold();
    out["gamma"] = cmdp.gamma();
    const double zeta = slater_gap(cmdp);
    out["zeta"] = zeta;
    if (zeta < 0.0) throw InfeasibleError("max_pi J_c is below the threshold", zeta);
    const LpSolution lp = solve_constrained_lp(cmdp);
    out["J_r_star"] = lp.j_r_star;
    out["J_c_star"] = lp.j_c_star;
    out["lambda_lp"] = lp.constraint_dual;
    if (zeta > 0.0) {
        const double upper = 2.0 / (zeta * (1.0 - cmdp.gamma()));
        const DualScanResult scan = lambda_star_scan(cmdp, linear_grid(0.0, 2.0 * upper, 401));
        out["U"] = upper;
        out["lambda_hat_star"] = scan.lambda_hat_star;
        out["lambda_bound"] = 1.0 / (zeta * (1.0 - cmdp.gamma()));
    }
    const FeatureMap features = make_features(config, cmdp);
    const Evaluation qr = exact_eval(cmdp, lp.optimal_policy, Signal::reward);
    const Evaluation qc = exact_eval(cmdp, lp.optimal_policy, Signal::constraint);
    out["features"] = std::string(to_string(features.kind()));
    out["feature_dim"] = features.dim();
    out["eps_b_r"] = chebyshev_eps_b(qr.q, features).eps_b;
    out["eps_b_c"] = chebyshev_eps_b(qc.q, features).eps_b;
    return out;
}

json coreset_report(const ExperimentConfig& config) {
    const TabularCmdp cmdp = make_env(config.env);
    const FeatureMap features = make_features(config, cmdp);
    const Coreset core = make_coreset(config, features);
    json out;
    out["feature_dim"] = features.dim();
    out["eps_prime"] = core.eps_prime;
    out["nu"] = core.nu;
    out["size"] = core.size();
    out["sup_leverage"] = all_leverages(core, features).maxCoeff();
    out["hit_cap"] = core.hit_cap;
    json points = json::array();
    for (int i = 0; i < core.size(); ++i) {
        const StateAction sa = cmdp.pair_at(core.points[i]);
        points.push_back({{"state", sa.state}, {"action", sa.action}, {"omega", core.omega(i)}});
    }
    out["points"] = std::move(points);
    return out;
}

} // namespace cmdp
