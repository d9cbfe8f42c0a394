// resave: command-line front end.
//
//   resave simulate   Monte Carlo R^2 table for the two simulation models
//   resave bench      recursive vs batch timing
//   resave fit        one fit on a CSV file or a simulated sample
//   resave stream     absorb CSV lines one at a time, with checkpoints
//   resave eval-real  held-out R^2_i on a real dataset
//   resave selfcheck  fast oracle checks
//
// Reports are comma-separated, one header line, '\n' endings, reals with 17
// significant digits. Exit codes: 0 ok, 1 runtime error, 2 usage error.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "resave/checkpoint.hpp"
#include "resave/error.hpp"
#include "resave/experiments.hpp"
#include "resave/ingestion.hpp"
#include "resave/save_estimator.hpp"
#include "resave/selfcheck.hpp"

using namespace resave;

namespace {

std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

template <class T>
std::string num(T v)
    requires std::is_integral_v<T>
{
    return std::to_string(v);
}

// Output destination: a file when a path is given, stdout otherwise. Opened
// before any work starts so a bad path fails fast.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
        require(file_->good(), ErrorCode::io_error, "cannot write '" + path + "'");
    }
    std::ostream& out() { return file_ ? *file_ : std::cout; }
    void line(const std::vector<std::string>& cells) {
        std::ostream& o = out();
        for (std::size_t i = 0; i < cells.size(); ++i) o << (i ? "," : "") << cells[i];
        o << '\n';
    }
    void finish() {
        out().flush();
        require(out().good(), ErrorCode::io_error, "write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::vector<std::string> beta_columns(std::string_view prefix, std::size_t d) {
    std::vector<std::string> cols;
    for (std::size_t j = 1; j <= d; ++j) cols.push_back(std::string(prefix) + std::to_string(j));
    return cols;
}

std::vector<ColumnRef> column_refs(const std::vector<std::string>& names) {
    return std::vector<ColumnRef>(names.begin(), names.end());
}

struct FitFlags {
    double c1 = 0.2;
    double c2 = 0.03;
    double epsilon = 0.05;
    double gamma_scale = 1.0;
    bool strict = false;
    std::string kernel = "epanechnikov";
    std::size_t N = 1;

    void attach(CLI::App* app) {
        app->add_option("--c1", c1, "bandwidth exponent, h_n = n^-c1")->capture_default_str();
        app->add_option("--c2", c2, "truncation exponent, b_n = min(epsilon, n^-c2)")->capture_default_str();
        app->add_option("--epsilon", epsilon, "truncation cap")->capture_default_str();
        app->add_option("--gamma-scale", gamma_scale, "stepsize gamma_n = scale / n")->capture_default_str();
        app->add_flag("--strict-assumptions", strict, "reject (c1, c2) outside the consistency region");
        app->add_option("--kernel", kernel, "smoothing kernel")
            ->check(CLI::IsMember({"epanechnikov", "quartic4"}))
            ->capture_default_str();
        app->add_option("--N", N, "number of directions retained")->check(CLI::PositiveNumber)->capture_default_str();
    }

    FitOptions options() const {
        FitOptions o;
        o.plan.c1 = c1;
        o.plan.c2 = c2;
        o.plan.epsilon_trunc = epsilon;
        o.plan.gamma_scale = gamma_scale;
        o.plan.strict_assumptions = strict;
        o.plan.validate();
        o.kernel = Kernel::from_name(kernel);
        o.N = N;
        return o;
    }
};

std::vector<Estimator> estimators_from(const std::string& flag) {
    if (flag == "both") return {Estimator::save_r, Estimator::save_nr};
    return {parse_estimator(flag)};
}

void report_skipped(std::string_view what, const std::vector<std::size_t>& lines) {
    if (lines.empty()) return;
    std::cerr << "skipped " << lines.size() << ' ' << what << " (line";
    for (std::size_t i = 0; i < lines.size() && i < 20; ++i) std::cerr << (i ? ", " : " ") << lines[i];
    if (lines.size() > 20) std::cerr << ", ...";
    std::cerr << ")\n";
}

// ---- simulate ----

struct SimulateCmd {
    std::string model = "1";
    std::size_t n0 = 100;
    std::vector<std::size_t> p{400};
    std::size_t reps = 200;
    std::string estimator = "both";
    std::uint64_t seed = 1;
    std::string standardize = "sample";
    std::size_t threads = 0;
    std::string out;
    std::string replications;
    FitFlags fit;

    void attach(CLI::App* app) {
        app->add_option("--model", model, "simulation model")
            ->check(CLI::IsMember({"1", "2", "model1", "model2"}))
            ->capture_default_str();
        app->add_option("--n0", n0, "initial sample size")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--p", p, "added observations; comma-separated list allowed")
            ->delimiter(',')
            ->capture_default_str();
        app->add_option("--reps", reps, "replications per configuration")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("--estimator", estimator, "estimator")
            ->check(CLI::IsMember({"save-r", "save-nr", "both"}))
            ->capture_default_str();
        app->add_option("--seed", seed, "master seed")->capture_default_str();
        app->add_option("--standardize", standardize, "whitening of simulated predictors")
            ->check(CLI::IsMember({"sample", "population"}))
            ->capture_default_str();
        app->add_option("--threads", threads, "worker threads (0: RESAVE_THREADS or all cores)")
            ->capture_default_str();
        app->add_option("--out", out, "report file (default stdout)");
        app->add_option("--replications", replications, "per-replication file");
        fit.attach(app);
    }

    int run() {
        Sink report(out);
        std::optional<Sink> per_rep;
        if (!replications.empty()) per_rep.emplace(replications);

        ReplicationConfig config;
        config.model = parse_model(model);
        config.n0 = n0;
        config.reps = reps;
        config.seed = seed;
        config.standardization = parse_standardization(standardize);
        config.fit = fit.options();
        config.threads = threads;

        report.line({"model", "estimator", "p", "r2_mean", "r2_std", "reps", "seed"});
        if (per_rep) {
            std::vector<std::string> head{"model", "estimator", "p", "rep", "r2"};
            const auto b = beta_columns("beta_", ModelSpec::make(config.model).d);
            head.insert(head.end(), b.begin(), b.end());
            per_rep->line(head);
        }
        int status = 0;
        for (std::size_t pv : p) {
            for (Estimator e : estimators_from(estimator)) {
                config.p = pv;
                config.estimator = e;
                const ReplicationReport r = run_replications(config);
                if (r.failures > 0)
                    std::cerr << to_string(e) << " p=" << pv << ": " << r.failures << " of " << r.reps
                              << " replications failed\n";
                if (r.r2.empty()) status = 1;
                report.line({std::string(to_string(r.model)), std::string(to_string(e)), num(pv), num(r.r2_mean),
                             num(r.r2_std), num(r.reps), num(r.seed)});
                if (per_rep) {
                    for (std::size_t k = 0; k < r.r2.size(); ++k) {
                        std::vector<std::string> row{std::string(to_string(r.model)), std::string(to_string(e)),
                                                     num(pv), num(r.rep_index[k]), num(r.r2[k])};
                        for (double b : r.beta_hat[k]) row.push_back(num(b));
                        per_rep->line(row);
                    }
                }
            }
        }
        report.finish();
        if (per_rep) per_rep->finish();
        return status;
    }
};

// ---- bench ----

struct BenchCmd {
    static constexpr std::size_t default_reps = 10;
    std::string model = "1";
    std::size_t n0 = 100;
    std::vector<std::size_t> p{100, 400};
    std::size_t reps = default_reps;
    std::uint64_t seed = 1;
    std::string standardize = "sample";
    std::string out;
    FitFlags fit;

    void attach(CLI::App* app) {
        app->add_option("--model", model, "simulation model")
            ->check(CLI::IsMember({"1", "2", "model1", "model2"}))
            ->capture_default_str();
        app->add_option("--n0", n0, "initial sample size")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--p", p, "added observations; comma-separated list allowed")
            ->delimiter(',')
            ->capture_default_str();
        app->add_option("--reps", reps,
                        "timed replications per p (default " + std::to_string(default_reps) +
                            "; one extra untimed warm-up)")
            ->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "master seed")->capture_default_str();
        app->add_option("--standardize", standardize, "whitening of simulated predictors")
            ->check(CLI::IsMember({"sample", "population"}))
            ->capture_default_str();
        app->add_option("--out", out, "report file (default stdout)");
        fit.attach(app);
    }

    int run() {
        Sink report(out);
        const auto results = run_timing(parse_model(model), n0, p, reps, seed, fit.options(),
                                        parse_standardization(standardize));
        report.line({"estimator", "p", "mean_s", "std_s", "ratio"});
        for (const TimingComparison& t : results) {
            for (const ReplicationReport* r : {&t.recursive, &t.batch})
                report.line({std::string(to_string(r->estimator)), num(t.p), num(r->wall_times.mean),
                             num(r->wall_times.std), num(t.ratio)});
        }
        report.finish();
        return 0;
    }
};

// ---- fit ----

struct FitCmd {
    std::string data;
    std::string response = "0";
    std::vector<std::string> predictors;
    std::string model = "1";
    std::size_t n = 500;
    std::uint64_t seed = 1;
    std::string estimator = "save-r";
    bool no_standardize = false;
    std::string out;
    FitFlags fit;

    void attach(CLI::App* app) {
        app->add_option("--data", data, "CSV file (.gz accepted); omit to fit a simulated sample");
        app->add_option("--response", response, "response column, name or 0-based index")->capture_default_str();
        app->add_option("--predictors", predictors, "predictor columns (default: all others)")->delimiter(',');
        app->add_option("--model", model, "simulation model when --data is absent")
            ->check(CLI::IsMember({"1", "2", "model1", "model2"}))
            ->capture_default_str();
        app->add_option("--n", n, "simulated sample size")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--seed", seed, "seed for the simulated sample")->capture_default_str();
        app->add_option("--estimator", estimator, "estimator")
            ->check(CLI::IsMember({"save-r", "save-nr"}))
            ->capture_default_str();
        app->add_flag("--no-standardize", no_standardize, "fit on the raw predictors");
        app->add_option("--out", out, "report file (default stdout)");
        fit.attach(app);
    }

    int run() {
        Sink report(out);
        std::vector<Observation> obs;
        std::vector<std::string> names;
        if (!data.empty()) {
            const Dataset ds = load_csv(data, ColumnRef{response}, column_refs(predictors));
            report_skipped("rows with missing or unparsable cells", ds.skipped_lines);
            obs = ds.observations();
            for (std::size_t j : ds.predictor_indices) names.push_back(ds.column_names[j]);
        } else {
            const ModelSpec spec = ModelSpec::make(parse_model(model));
            Rng rng(seed);
            obs = generate(spec, n, rng);
            names = beta_columns("x", spec.d);
        }
        FitOptions options = fit.options();
        options.standardize = !no_standardize;
        const FitResult result = parse_estimator(estimator) == Estimator::save_r ? fit_recursive(obs, options)
                                                                                 : fit_batch(obs, options);

        std::vector<std::string> head{"component", "eigenvalue"};
        head.insert(head.end(), names.begin(), names.end());
        report.line(head);
        for (std::size_t j = 0; j < result.edr.N; ++j) {
            std::vector<std::string> row{num(j + 1), num(result.edr.eigenvalues[j])};
            for (double b : result.edr.direction_original(j)) row.push_back(num(b));
            report.line(row);
        }
        report.finish();
        return 0;
    }
};

// ---- stream ----

struct StreamCmd {
    std::string input = "-";
    std::string response = "0";
    std::vector<std::string> predictors;
    std::size_t n0 = 100;
    std::string checkpoint;
    std::string save_checkpoint_path;
    bool emit = false;
    bool no_standardize = false;
    std::string out;
    FitFlags fit;

    void attach(CLI::App* app) {
        app->add_option("--input", input, "CSV stream with a header line ('-' for stdin)")->capture_default_str();
        app->add_option("--response", response, "response column, name or 0-based index")->capture_default_str();
        app->add_option("--predictors", predictors, "predictor columns (default: all others)")->delimiter(',');
        app->add_option("--n0", n0, "rows fitted at once before streaming starts (ignored with --checkpoint)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("--checkpoint", checkpoint, "resume from this checkpoint instead of an initial batch");
        app->add_option("--save-checkpoint", save_checkpoint_path, "write the final state here");
        app->add_flag("--emit", emit, "one output line after every absorbed row (default: final state only)");
        app->add_flag("--no-standardize", no_standardize, "fit on the raw predictors");
        app->add_option("--out", out, "output file (default stdout)");
        fit.attach(app);
    }

    int run() {
        Sink sink(out);
        std::ifstream file;
        if (input != "-") {
            file.open(input, std::ios::binary);
            require(file.good(), ErrorCode::io_error, "cannot open '" + input + "'");
        }
        std::istream& in = input == "-" ? std::cin : file;

        std::optional<StreamingFit> bundle;
        if (!checkpoint.empty()) bundle.emplace(load_checkpoint(checkpoint));
        FitOptions options = fit.options();
        options.standardize = !no_standardize;

        std::string line;
        std::size_t line_no = 0;
        std::optional<ColumnSelection> sel;
        std::size_t width = 0;
        while (!sel && std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto header = split_csv_line(line);
            sel = resolve_columns(header, ColumnRef{response}, column_refs(predictors));
            width = header.size();
        }
        if (!sel) {
            require(bundle.has_value(), ErrorCode::insufficient_data, "empty stream and no checkpoint");
            finish(sink, *bundle, 0);
            return 0;
        }
        const std::size_t d = sel->predictors.size();
        if (bundle)
            require(bundle->state().dim() == d, ErrorCode::schema_error,
                    "checkpoint has " + std::to_string(bundle->state().dim()) + " predictors, stream selects " +
                        std::to_string(d));

        std::vector<Observation> initial;
        std::vector<std::size_t> malformed;
        std::size_t updates = 0;
        bool header_written = false;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const auto fields = split_csv_line(line);
            std::optional<Observation> obs;
            if (fields.size() == width) {
                Observation o{0.0, Vector(d)};
                bool ok = true;
                if (const auto y = parse_cell(fields[sel->response])) o.y = *y; else ok = false;
                for (std::size_t j = 0; ok && j < d; ++j) {
                    if (const auto v = parse_cell(fields[sel->predictors[j]])) o.x[j] = *v; else ok = false;
                }
                if (ok) obs = std::move(o);
            }
            if (!obs) {
                malformed.push_back(line_no);
                continue;
            }
            if (!bundle) {
                initial.push_back(std::move(*obs));
                if (initial.size() == n0) {
                    bundle.emplace(StreamingFit::fit(initial, options));
                    initial.clear();
                }
                continue;
            }
            bundle->update(*obs);
            ++updates;
            if (emit) write_state(sink, *bundle, header_written);
        }
        report_skipped("malformed lines", malformed);
        require(bundle.has_value(), ErrorCode::insufficient_data,
                "stream ended after " + std::to_string(initial.size()) + " usable rows; --n0 is " + std::to_string(n0));
        if (!emit && updates > 0) write_state(sink, *bundle, header_written);
        finish(sink, *bundle, updates);
        return 0;
    }

    void write_state(Sink& sink, const StreamingFit& fit, bool& header_written) {
        const FitResult& r = fit.result();
        const std::size_t d = fit.state().dim();
        if (!header_written) {
            std::vector<std::string> head{"n"};
            for (std::size_t j = 1; j <= r.edr.N; ++j) head.push_back("eigenvalue_" + std::to_string(j));
            for (std::size_t j = 1; j <= r.edr.N; ++j)
                for (std::size_t k = 1; k <= d; ++k)
                    head.push_back("beta_" + std::to_string(j) + "_" + std::to_string(k));
            sink.line(head);
            header_written = true;
        }
        std::vector<std::string> row{num(fit.state().size())};
        for (std::size_t j = 0; j < r.edr.N; ++j) row.push_back(num(r.edr.eigenvalues[j]));
        for (std::size_t j = 0; j < r.edr.N; ++j)
            for (double b : r.edr.direction_original(j)) row.push_back(num(b));
        sink.line(row);
    }

    void finish(Sink& sink, const StreamingFit& fit, std::size_t updates) {
        if (!save_checkpoint_path.empty()) save_checkpoint(save_checkpoint_path, fit);
        sink.finish();
        std::cerr << "absorbed " << updates << " updates, n = " << fit.state().size() << '\n';
    }
};

// ---- eval-real ----

struct EvalRealCmd {
    std::string data;
    std::string response = "0";
    std::vector<std::string> predictors;
    std::size_t n0 = 100;
    std::vector<std::size_t> p{25, 50, 75, 100, 150, 200, 300, 400};
    std::string estimator = "both";
    std::vector<double> reference;
    std::optional<std::uint64_t> shuffle_seed;
    std::string out;
    FitFlags fit;

    void attach(CLI::App* app) {
        app->add_option("--data", data, "CSV file (.gz accepted)")->required();
        app->add_option("--response", response, "response column, name or 0-based index")->capture_default_str();
        app->add_option("--predictors", predictors, "predictor columns (default: all others)")->delimiter(',');
        app->add_option("--n0", n0, "initial sample size")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--p", p, "added observations; comma-separated list allowed")
            ->delimiter(',')
            ->capture_default_str();
        app->add_option("--estimator", estimator, "estimator")
            ->check(CLI::IsMember({"save-r", "save-nr", "both"}))
            ->capture_default_str();
        app->add_option("--reference", reference,
                        "reference direction, comma-separated (default: Save-NR on the whole dataset)")
            ->delimiter(',');
        app->add_option("--shuffle-seed", shuffle_seed, "shuffle rows with this seed (default: file order)");
        app->add_option("--out", out, "report file (default stdout)");
        fit.attach(app);
    }

    int run() {
        Sink report(out);
        const Dataset ds = load_csv(data, ColumnRef{response}, column_refs(predictors));
        report_skipped("rows with missing or unparsable cells", ds.skipped_lines);

        HoldoutConfig config;
        config.n0 = n0;
        config.fit = fit.options();
        config.shuffle_seed = shuffle_seed;
        if (!reference.empty()) config.reference = reference;

        std::vector<std::string> head{"estimator", "p", "evaluated", "skipped", "r2_mean", "r2_std"};
        for (std::size_t j : ds.predictor_indices) head.push_back("beta_" + ds.column_names[j]);
        report.line(head);
        for (std::size_t pv : p) {
            for (Estimator e : estimators_from(estimator)) {
                config.p = pv;
                config.estimator = e;
                const HoldoutReport r = holdout_eval(ds, config);
                if (!config.reference) config.reference = r.reference;  // same pseudo-truth for every row
                std::vector<std::string> row{std::string(to_string(e)), num(pv), num(r.evaluated), num(r.skipped),
                                             num(r.r2_mean), num(r.r2_std)};
                for (double b : r.beta_hat) row.push_back(num(b));
                report.line(row);
            }
        }
        report.finish();
        return 0;
    }
};

// ---- selfcheck ----

struct SelfcheckCmd {
    std::string fault;
    std::string kernel = "epanechnikov";

    void attach(CLI::App* app) {
        app->add_option("--inject-fault", fault, "deliberately break one component (test hook)")
            ->check(CLI::IsMember({"kernel-constant"}));
        app->add_option("--kernel", kernel, "kernel under test")
            ->check(CLI::IsMember({"epanechnikov", "quartic4"}))
            ->capture_default_str();
    }

    int run() {
        SelfcheckOptions options;
        options.kernel = Kernel::from_name(kernel);
        if (fault == "kernel-constant")
            options.kernel = Kernel::with_constant(options.kernel.id(), 1.1 * options.kernel.constant());
        bool ok = true;
        for (const CheckResult& c : run_selfcheck(options)) {
            ok = ok && c.passed;
            std::printf("%s %-26s error %.3g  tolerance %.3g\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                        c.error, c.tolerance);
        }
        std::printf("%s\n", ok ? "all checks passed" : "selfcheck FAILED");
        return ok ? 0 : 1;
    }
};

// Config file: `key = value` lines, '#' comments. Keys name options of the
// chosen subcommand (with or without leading dashes). Entries are spliced in
// right after the subcommand unless the same option appears on the command
// line, so explicit flags always win.
std::vector<std::string> expand_config(std::vector<std::string> args, CLI::App& app) {
    std::optional<std::string> path;
    for (std::size_t i = 1; i < args.size();) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    if (!path) return args;

    std::size_t sub_pos = 0;
    CLI::App* sub = nullptr;
    for (std::size_t i = 1; i < args.size() && !sub; ++i) {
        for (CLI::App* s : app.get_subcommands({}))
            if (s->get_name() == args[i]) {
                sub = s;
                sub_pos = i;
            }
    }
    if (!sub) throw CLI::RequiredError("a subcommand is required with --config");

    std::ifstream in(*path);
    if (!in) throw CLI::FileError::Missing(*path);
    auto given = [&](const std::string& opt) {
        for (std::size_t i = sub_pos + 1; i < args.size(); ++i)
            if (args[i] == opt || args[i].rfind(opt + "=", 0) == 0) return true;
        return false;
    };
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::vector<std::string> extra;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string text = trim(raw.substr(0, raw.find('#')));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw CLI::ConversionError(*path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(text.substr(0, eq));
        while (!key.empty() && key.front() == '-') key.erase(0, 1);
        const std::string value = trim(text.substr(eq + 1));
        const std::string opt = "--" + key;
        if (sub->get_option_no_throw(opt) == nullptr)
            throw CLI::ExtrasError(*path + ":" + std::to_string(line_no) + ": unknown key '" + key + "' for " +
                                       sub->get_name(),
                                   std::vector<std::string>{key});
        if (!given(opt)) extra.push_back(opt + "=" + value);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recursive kernel SAVE: simulations, fits, streaming updates and benchmarks"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");
    std::string config_path;
    app.add_option("--config", config_path, "key = value file; command-line flags override it");

    SimulateCmd simulate;
    BenchCmd bench;
    FitCmd fit;
    StreamCmd stream;
    EvalRealCmd eval_real;
    SelfcheckCmd selfcheck;
    simulate.attach(app.add_subcommand("simulate", "R^2 means and deviations over replications"));
    bench.attach(app.add_subcommand("bench", "recursive vs non-recursive timing"));
    fit.attach(app.add_subcommand("fit", "estimate directions from a CSV file or a simulated sample"));
    stream.attach(app.add_subcommand("stream", "update the fit one CSV line at a time"));
    eval_real.attach(app.add_subcommand("eval-real", "held-out R^2_i on a real dataset"));
    selfcheck.attach(app.add_subcommand("selfcheck", "fast internal consistency checks"));

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args), app);
        std::vector<char*> cargs;
        for (std::string& a : args) cargs.push_back(a.data());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("simulate")) return simulate.run();
        if (app.got_subcommand("bench")) return bench.run();
        if (app.got_subcommand("fit")) return fit.run();
        if (app.got_subcommand("stream")) return stream.run();
        if (app.got_subcommand("eval-real")) return eval_real.run();
        if (app.got_subcommand("selfcheck")) return selfcheck.run();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
