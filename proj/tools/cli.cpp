#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmlab/evolve.hpp"
#include "wmlab/manifest.hpp"
#include "wmlab/profiles.hpp"
#include "wmlab/serialization.hpp"
#include "wmlab/spectrum.hpp"
#include "wmlab/threshold.hpp"

namespace wmlab::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double x, int digits = 17) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::string pair_str(std::pair<double, double> p) { return num(p.first) + " " + num(p.second); }

/// Options shared by every subcommand.
struct Common {
    std::string out = ".";
    int threads = 1;
};

struct GridFlags {
    std::optional<int> points;
    std::optional<double> rho_max;
    std::optional<double> dissipation;
    std::optional<double> rk_tol;

    void add(CLI::App* app) {
        app->add_option("--grid-points", points, "Grid points including rho = 0")->check(CLI::Range(17, 1 << 20));
        app->add_option("--rho-max", rho_max, "Outer radius (default 2 f_1'(0))")->check(CLI::PositiveNumber);
        app->add_option("--dissipation", dissipation, "Kreiss-Oliger strength")->check(CLI::NonNegativeNumber);
        app->add_option("--rk-tol", rk_tol, "DOPRI5 tolerance")->check(CLI::PositiveNumber);
    }

    GridSpec resolve(double expected_c) const {
        GridSpec g = default_grid(expected_c);
        if (points) g.n_points = *points;
        if (rho_max) g.rho_max = *rho_max;
        if (dissipation) g.dissipation_eps = *dissipation;
        if (rk_tol) g.rk_tol = *rk_tol;
        g.validate();
        return g;
    }
};

void record_grid(std::map<std::string, std::string>& p, const GridSpec& g) {
    p["grid.n_points"] = std::to_string(g.n_points);
    p["grid.rho_max"] = num(g.rho_max);
    p["grid.dissipation_eps"] = num(g.dissipation_eps);
    p["grid.rk_tol"] = num(g.rk_tol);
    p["grid.cfl"] = num(g.cfl);
}

/// Raw arguments with --out removed and the values of path options made absolute.
std::vector<std::string> normalize_args(const std::vector<std::string>& raw, const std::vector<std::string>& path_opts,
                                        const std::map<std::string, std::vector<std::string>>& resolved) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::string& a = raw[i];
        if (a == "--out") {
            ++i;
            continue;
        }
        if (a.rfind("--out=", 0) == 0) continue;
        const auto eq = a.find('=');
        const std::string name = a.substr(0, eq);
        if (std::find(path_opts.begin(), path_opts.end(), name) != path_opts.end()) {
            out.push_back(name);
            for (const auto& v : resolved.at(name)) out.push_back(v);
            if (eq == std::string::npos) {
                while (i + 1 < raw.size() && raw[i + 1].rfind("--", 0) != 0) ++i;
            }
            continue;
        }
        out.push_back(a);
    }
    return out;
}

class Session {
public:
    Session(std::string command, const Common& common, std::vector<std::string> args)
        : common_(common), out_dir_(fs::absolute(common.out).lexically_normal()) {
        m_.command = std::move(command);
        m_.args = std::move(args);
        m_.threads = common.threads;
        m_.id = manifest_id(m_.command, m_.args);
        m_.out_dir = out_dir_.string();
        m_.started = utc_timestamp();
        m_.code_version = version();
    }

    const std::string& id() const { return m_.id; }
    fs::path path(const std::string& name) const { return out_dir_ / name; }
    std::map<std::string, std::string>& parameters() { return m_.parameters; }

    void input(const fs::path& p) { m_.inputs.push_back(artifact_record(p)); }

    fs::path write(const std::string& name, const std::string& content) {
        const fs::path p = path(name);
        io::write_atomic(p, content);
        m_.outputs.push_back(artifact_record(p));
        return p;
    }

    fs::path finish(const std::string& label, std::ostream& out) {
        m_.finished = utc_timestamp();
        const fs::path p = path(label + ".manifest.json");
        save_manifest(p, m_);
        out << "manifest " << p.string() << "\n";
        return p;
    }

private:
    Common common_;
    fs::path out_dir_;
    RunManifest m_;
};

/// `spec` is a profile id (looked up as <out>/<id>.json) or a path.
fs::path resolve_profile(const std::string& spec, const Common& common) {
    fs::path p(spec);
    if (p.extension() != ".json" && p.filename() == p) p = fs::path(common.out) / (spec + ".json");
    p = fs::absolute(p).lexically_normal();
    if (!fs::exists(p)) throw IoError("profile file not found: " + p.string());
    return p;
}

fs::path existing(const std::string& spec) {
    fs::path p = fs::absolute(spec).lexically_normal();
    if (!fs::exists(p)) throw IoError("file not found: " + p.string());
    return p;
}

std::string amp_label(double A) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", A);
    return buf;
}

// ---------------------------------------------------------------------------

struct ProfileCmd {
    int d = 0;
    int n = 1;
    std::vector<double> bracket;
    std::string branch;

    void add(CLI::App* app) {
        app->add_option("--d", d, "Space dimension")->required();
        app->add_option("--n", n, "Nodal index")->check(CLI::NonNegativeNumber);
        app->add_option("--bracket", bracket, "Search interval for f'(0)")->expected(2);
        app->add_option("--branch", branch, "Boundary branch: D3, D5Main, D5Alt or EvenD");
    }

    int run(const Common& common, const std::vector<std::string>& raw, std::ostream& out) {
        const Dimension dim(d);
        std::optional<std::pair<double, double>> br;
        if (!bracket.empty()) br = std::make_pair(bracket[0], bracket[1]);
        std::optional<BranchKind> kind;
        if (!branch.empty()) kind = branch_kind_from_string(branch);
        Session s("profile", common, normalize_args(raw, {}, {}));
        const SelfSimilarProfile p = find_profile(dim, n, br, {}, kind, common.threads);
        auto& par = s.parameters();
        par["d"] = std::to_string(d);
        par["n"] = std::to_string(n);
        par["bracket"] = pair_str(br.value_or(default_c_bracket(dim, n)));
        par["branch"] = to_string(kind_of(p.branch));
        par["ode_tol"] = num(p.settings.ode_tol);
        par["match_tol"] = num(p.settings.match_tol);
        par["threads"] = std::to_string(common.threads);
        const fs::path file = s.write(p.id() + ".json", io::profile_to_text(p));

        out << "profile " << p.id() << " -> " << file.string() << "\n";
        out << "d  n  f'(0)            f(1)             f'(1)\n";
        char row[160];
        std::snprintf(row, sizeof row, "%d  %d  %-15.10f  %-15.10f  %-15.10f\n", p.d, p.n, p.c, p.f1, p.fp1);
        out << row;
        if (p.n == 0) {
            double worst = 0.0;
            for (int i = 0; i < 50; ++i) {
                const double y = (i + 0.5) / 50.0;
                worst = std::max(worst, std::abs(p.f(y) - closed_form_f0(dim, y)));
            }
            out << "closed form: c0 = 2/sqrt(d-2) = " << num(dim.c0(), 15) << ", |c - c0| = " << num(std::abs(p.c - dim.c0()), 3)
                << ", max |f - 2 arctan(y/sqrt(d-2))| on 50 points = " << num(worst, 3) << "\n";
        }
        s.finish(p.id(), out);
        return 0;
    }
};

struct SpectrumCmd {
    std::string profile;
    std::vector<double> range;
    int max_count = 0;
    bool no_eigenfunctions = false;

    void add(CLI::App* app) {
        app->add_option("--profile", profile, "Profile id (resolved in --out) or path")->required();
        app->add_option("--range", range, "Eigenvalue search interval")->expected(2);
        app->add_option("--max-count", max_count, "Keep at most this many (largest) eigenvalues; 0 keeps all");
        app->add_flag("--no-eigenfunctions", no_eigenfunctions, "Omit eigenfunction samples");
    }

    int run(const Common& common, const std::vector<std::string>& raw, std::ostream& out) {
        const fs::path pfile = resolve_profile(profile, common);
        Session s("spectrum", common, normalize_args(raw, {"--profile"}, {{"--profile", {pfile.string()}}}));
        s.input(pfile);
        const SelfSimilarProfile p = io::load_profile(pfile);
        const auto r = range.empty() ? default_lambda_range(p.dimension()) : std::make_pair(range[0], range[1]);
        const SpectrumReport rep = find_eigenvalues(p, r, max_count, {}, common.threads, !no_eigenfunctions);
        auto& par = s.parameters();
        par["profile"] = p.id();
        par["range"] = pair_str(r);
        par["max_count"] = std::to_string(max_count);
        par["threads"] = std::to_string(common.threads);
        const std::string label = "spectrum_" + p.id();
        const fs::path file = s.write(label + ".json", io::spectrum_to_text(rep, p.c));

        out << "spectrum " << p.id() << " -> " << file.string() << "\n";
        out << "d=" << p.d << " n=" << p.n << ":";
        char buf[32];
        for (double l : rep.eigenvalues()) {
            std::snprintf(buf, sizeof buf, " %.5f", l);
            out << buf;
        }
        out << "\n";
        out << "gauge |det(1)| = " << num(rep.gauge_residual, 3) << ", eigenvalues above d-2: " << rep.count_above_dm2
            << ", at d-2: " << rep.count_at_dm2 << ", Sturm count: " << rep.sturm_count << "\n";
        s.finish(label, out);
        return 0;
    }
};

struct EvolveCmd {
    int d = 0;
    std::optional<double> amp;
    std::string profile;
    GridFlags grid;
    double tau_end = 30.0;
    double sample_every = 0.01;
    std::vector<double> snapshots;
    bool no_stop = false;
    double gauge_tau_min = 5.0;
    std::string label;

    void add(CLI::App* app) {
        app->add_option("--d", d, "Space dimension (with --amp)");
        auto* a = app->add_option("--amp", amp, "Amplitude A of the data A rho / cosh(rho)");
        auto* pr = app->add_option("--profile", profile, "Start from a profile (id or path) instead");
        a->excludes(pr);
        grid.add(app);
        app->add_option("--tau-end", tau_end, "Final time tau")->check(CLI::PositiveNumber);
        app->add_option("--sample-every", sample_every, "Trace sampling interval in tau")->check(CLI::PositiveNumber);
        app->add_option("--snapshots", snapshots, "Dump (rho, V, P) at these tau");
        app->add_flag("--no-stop", no_stop, "Keep integrating after the run is classified");
        app->add_option("--gauge-tau-min", gauge_tau_min, "Start of the gauge-law fit");
        app->add_option("--label", label, "Output file stem");
    }

    int run(const Common& common, const std::vector<std::string>& raw, std::ostream& out) {
        std::optional<SelfSimilarProfile> prof;
        fs::path pfile;
        if (!profile.empty()) {
            pfile = resolve_profile(profile, common);
            prof = io::load_profile(pfile);
            d = prof->d;
        } else if (!amp) {
            throw ValidationError("evolve needs --amp or --profile");
        }
        const Dimension dim(d);
        std::vector<std::string> args = pfile.empty() ? normalize_args(raw, {}, {})
                                                       : normalize_args(raw, {"--profile"}, {{"--profile", {pfile.string()}}});
        Session s("evolve", common, std::move(args));
        if (prof) s.input(pfile);

        RunOptions ro;
        ro.tau_end = tau_end;
        ro.sample_every = sample_every;
        ro.stop_on_classification = !no_stop;
        ro.snapshot_taus = snapshots;
        ro.classifier.endstates = known_endstates(dim);
        double c_max = 0.0;
        for (const auto& e : ro.classifier.endstates) c_max = std::max(c_max, e.c);
        const GridSpec g = grid.resolve(prof ? prof->c : c_max);
        const EvolutionState init = prof ? init_from_profile(*prof, g) : init_family(dim, *amp, g);
        if (label.empty()) label = prof ? "evolve_" + prof->id() : "evolve_d" + std::to_string(d) + "_A" + amp_label(*amp);

        auto& par = s.parameters();
        par["d"] = std::to_string(d);
        par["data"] = prof ? "profile " + prof->id() : "family A=" + num(*amp);
        record_grid(par, g);
        par["tau_end"] = num(tau_end);
        par["sample_every"] = num(sample_every);
        par["stop_on_classification"] = no_stop ? "false" : "true";

        const RunResult r = wmlab::run(init, g, ro);
        const fs::path trace_file = s.write(label + ".csv", io::trace_to_csv(r.trace));
        if (!r.snapshots.empty()) s.write(label + ".snapshots.csv", io::snapshots_to_csv(r.snapshots, g));

        nlohmann::ordered_json rep;
        rep["kind"] = "evolution";
        rep["manifest_id"] = s.id();
        rep["d"] = d;
        rep["data"] = par["data"];
        rep["grid"] = nlohmann::ordered_json::parse(io::grid_to_text(g));
        rep["classification"] = nlohmann::ordered_json::parse(io::classification_to_text(r.classification));
        rep["termination"] = r.termination;
        rep["tau_reached"] = r.final_state.tau;
        rep["t_reached"] = r.final_state.t;
        rep["steps"] = r.steps;
        rep["rhs_evaluations"] = r.rhs_evaluations;
        std::optional<GaugeLawFit> gl;
        try {
            gl = fit_gauge_law(r.trace, gauge_tau_min);
            rep["gauge_law"] = {{"c", gl->c}, {"max_residual", gl->max_residual}, {"samples", gl->samples},
                                {"tau_min", gauge_tau_min}};
        } catch (const Error&) {
            rep["gauge_law"] = nullptr;
        }
        s.write(label + ".json", rep.dump(2) + "\n");

        out << "evolve " << label << ": " << to_string(r.classification) << " (" << r.termination << ") at tau = "
            << num(r.final_state.tau, 6) << ", " << r.steps << " steps\n";
        if (gl) out << "gauge law: dV0 = 1 + " << num(gl->c, 8) << " e^-tau, max residual " << num(gl->max_residual, 3) << "\n";
        out << "trace " << trace_file.string() << "\n";
        s.finish(label, out);
        return 0;
    }
};

struct ThresholdCmd {
    int d = 0;
    std::vector<double> bracket;
    double rtol = 1e-13;
    GridFlags grid;
    double tau_end = 40.0;
    double sample_every = 0.01;
    bool figure2 = false;
    std::string label;

    void add(CLI::App* app) {
        app->add_option("--d", d, "Space dimension")->required();
        app->add_option("--bracket", bracket, "Amplitudes on either side of the threshold")->expected(2)->required();
        app->add_option("--rtol", rtol, "Relative bracket width to stop at")->check(CLI::PositiveNumber);
        grid.add(app);
        app->add_option("--tau-end", tau_end, "Evolution budget per run (doubled once for undecided runs)");
        app->add_option("--sample-every", sample_every, "Trace sampling interval in tau")->check(CLI::PositiveNumber);
        app->add_flag("--figure2", figure2, "Dump V snapshots of the final marginal pair");
        app->add_option("--label", label, "Output file stem");
    }

    int run(const Common& common, const std::vector<std::string>& raw, std::ostream& out) {
        const Dimension dim(d);
        Session s("threshold", common, normalize_args(raw, {}, {}));
        BisectionOptions o;
        o.classifier.endstates = known_endstates(dim);
        double c1 = 0.0;
        for (const auto& e : o.classifier.endstates) {
            if (!e.stable) c1 = std::max(c1, e.c);
        }
        o.grid = grid.resolve(c1);
        o.rel_tol = rtol;
        o.tau_end = tau_end;
        o.sample_every = sample_every;
        if (label.empty()) label = "threshold_d" + std::to_string(d);

        auto& par = s.parameters();
        par["d"] = std::to_string(d);
        par["bracket"] = num(bracket[0]) + " " + num(bracket[1]);
        par["rtol"] = num(rtol);
        record_grid(par, o.grid);
        par["tau_end"] = num(tau_end);
        par["sample_every"] = num(sample_every);

        const ThresholdResult r = bisect_amplitude(dim, {bracket[0], bracket[1]}, o);
        s.write(label + ".json", io::threshold_to_text(r, s.id()));
        s.write(label + ".sub.csv", io::trace_to_csv(r.sub_trace));
        s.write(label + ".super.csv", io::trace_to_csv(r.super_trace));

        if (figure2) {
            const double A_sub = r.lo_disperses ? r.A_lo : r.A_hi;
            const double A_super = r.lo_disperses ? r.A_hi : r.A_lo;
            for (auto [A, tag] : {std::pair{A_sub, "sub"}, std::pair{A_super, "super"}}) {
                RunOptions ro;
                ro.tau_end = 2.0 * tau_end;
                ro.sample_every = sample_every;
                ro.classifier = o.classifier;
                for (double t = 0.0; t <= ro.tau_end; t += 1.0) ro.snapshot_taus.push_back(t);
                const RunResult rr = wmlab::run(init_family(dim, A, o.grid), o.grid, ro);
                s.write(label + "." + tag + ".snapshots.csv", io::snapshots_to_csv(rr.snapshots, o.grid));
            }
        }

        out << "threshold d=" << d << ": A* = " << num(r.A_star, 16) << ", relative width "
            << num((r.A_hi - r.A_lo) / r.A_star, 3) << " after " << r.n_iters << " bisections\n";
        for (auto [trace, tag] : {std::pair{&r.sub_trace, "subcritical"}, std::pair{&r.super_trace, "supercritical"}}) {
            double sum = 0.0;
            int cnt = 0;
            for (const auto& x : trace->samples) {
                if (std::abs(x.h - c1) <= 0.01 * c1) {
                    sum += x.h;
                    ++cnt;
                }
            }
            out << tag << " run: plateau h = " << (cnt ? num(sum / cnt, 6) : std::string("none")) << " (f_1'(0) = "
                << num(c1, 6) << ") for delta tau = " << num(plateau_length(*trace, c1, 0.01), 4) << "\n";
        }
        s.finish(label, out);
        return 0;
    }
};

struct FitCmd {
    std::vector<std::string> traces;
    std::string lambdas;
    double band = 0.5;
    std::vector<double> tau_window;
    std::vector<double> t_bracket;
    int harmonics = 1;
    bool free_rates = false;
    std::string label;

    void add(CLI::App* app) {
        app->add_option("--trace", traces, "Trace CSV (repeatable)")->required()->expected(1, 2)->allow_extra_args(false);
        app->add_option("--lambdas", lambdas, "Spectrum document of f_1")->required();
        app->add_option("--band", band, "Fit window band around f_1'(0)")->check(CLI::PositiveNumber);
        app->add_option("--tau-window", tau_window, "Fit window as a tau interval")->expected(2);
        app->add_option("--T-bracket", t_bracket, "Bracket for the blowup time")->expected(2);
        app->add_option("--harmonics", harmonics, "Powers of the stable mode in the fit (1: three-mode expansion)")
            ->check(CLI::Range(1, 6));
        app->add_flag("--free-rates", free_rates, "Also measure lambda_1 and lambda_-1 from the pair (needs two traces)");
        app->add_option("--label", label, "Stem of the joint output");
    }

    int run(const Common& common, const std::vector<std::string>& raw, std::ostream& out) {
        std::vector<std::string> trace_paths;
        for (const auto& t : traces) trace_paths.push_back(existing(t).string());
        const fs::path lfile = existing(lambdas);
        Session s("fit", common,
                  normalize_args(raw, {"--trace", "--lambdas"}, {{"--trace", trace_paths}, {"--lambdas", {lfile.string()}}}));
        s.input(lfile);
        double f1p0 = 0.0;
        const SpectrumReport spec = io::load_spectrum(lfile, &f1p0);
        const LambdaSet L = lambda_set(spec);
        RefineOptions ro;
        ro.band = band;
        ro.harmonics = harmonics;
        if (free_rates && traces.size() != 2) throw ValidationError("--free-rates needs the sub- and supercritical traces");
        if (!tau_window.empty()) ro.tau_window = std::make_pair(tau_window[0], tau_window[1]);

        auto& par = s.parameters();
        par["spectrum"] = spec.profile_id;
        par["lambdas"] = num(L.l1) + " " + num(L.l0) + " " + num(L.lm1);
        par["f1p0"] = num(f1p0);
        par["band"] = num(band);
        par["harmonics"] = std::to_string(harmonics);
        if (ro.tau_window) par["tau_window"] = pair_str(*ro.tau_window);
        if (!t_bracket.empty()) par["T_bracket"] = num(t_bracket[0]) + " " + num(t_bracket[1]);

        std::vector<RunTrace> loaded;
        for (const auto& tp : trace_paths) {
            s.input(tp);
            loaded.push_back(io::load_trace(tp));
        }
        if (loaded.size() == 2 && t_bracket.empty()) ro.T_estimate = estimate_T_pair(loaded[0], loaded[1]);
        std::vector<FitResult> fits;
        for (std::size_t k = 0; k < loaded.size(); ++k) {
            const std::string& tp = trace_paths[k];
            const RunTrace& trace = loaded[k];
            FitResult f = t_bracket.empty() ? fit_trace(trace, L, f1p0, ro)
                                            : refine_T(trace, L, f1p0, {t_bracket[0], t_bracket[1]}, ro);
            const std::string stem = fs::path(tp).stem().string();
            s.write(stem + ".fit.json", io::fit_to_text(f, s.id()));
            auto series = reconstruct_similarity(trace, f.T_star);
            s.write(stem + ".similarity.csv", io::similarity_to_csv(series, &f));
            out << stem << ": T* = " << num(f.T_star, 16) << ", a1 = " << num(f.a1, 6) << ", a0 = " << num(f.a0, 3)
                << ", a-1 = " << num(f.a_minus1, 6) << ", residual/f1'(0) = " << num(f.residual / f1p0, 3)
                << ", window s in [" << num(f.window.s_min, 5) << ", " << num(f.window.s_max, 5) << "]\n";
            fits.push_back(f);
        }
        if (fits.size() == 2) {
            out << "average T* = " << num(average_T(fits[0], fits[1]), 16) << "\n";
        }
        if (free_rates) {
            const FreeRateFit fr = fit_free_rates(loaded[0], loaded[1], f1p0, average_T(fits[0], fits[1]));
            const std::string stem = label.empty() ? "fit_free_rates" : label;
            s.write(stem + ".json", io::free_rate_fit_to_text(fr, s.id()));
            out << "free rates: lambda_1 = " << num(fr.lambda1, 6) << " (spectrum " << num(L.l1, 6)
                << "), lambda_-1 = " << num(fr.lambda_minus1, 6) << " (spectrum " << num(L.lm1, 6)
                << ")\n";
        }
        s.finish(label.empty() ? "fit_" + fs::path(trace_paths.front()).stem().string() : label, out);
        return 0;
    }
};

std::string unique_temp_dir() {
    std::random_device rd;
    for (int k = 0; k < 100; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "wmlab-replay-%08x", rd());
        fs::path p = fs::temp_directory_path() / buf;
        if (fs::create_directory(p)) return p.string();
    }
    throw IoError("cannot create a temporary directory");
}

struct ReplayCmd {
    std::string manifest;
    std::string into;

    void add(CLI::App* app) {
        app->add_option("manifest", manifest, "Manifest to re-run")->required();
        app->add_option("--into", into, "Directory for the reproduced outputs (default: a fresh temporary one)");
    }

    int run(std::ostream& out, std::ostream& err) {
        const RunManifest m = load_manifest(existing(manifest));
        if (m.code_version != version()) {
            err << "warning: manifest written by version " << m.code_version << ", running " << version() << "\n";
        }
        for (const auto& in : m.inputs) {
            const ArtifactRecord now = artifact_record(in.path);
            if (now.sha256 != in.sha256) err << "warning: input " << in.path << " changed since the run\n";
        }
        const std::string dir = into.empty() ? unique_temp_dir() : into;
        std::vector<std::string> args{m.command};
        args.insert(args.end(), m.args.begin(), m.args.end());
        args.insert(args.end(), {"--out", dir});
        std::ostringstream sink;
        const int code = cli::run(args, sink, err);
        if (code != 0) return code;
        bool same = true;
        for (const auto& o : m.outputs) {
            const fs::path rel = fs::path(o.path).lexically_relative(m.out_dir);
            const fs::path again = fs::path(dir) / rel;
            const bool ok = fs::exists(again) && artifact_record(again).sha256 == o.sha256;
            same = same && ok;
            out << (ok ? "identical " : "DIFFERS   ") << rel.string() << "\n";
        }
        out << (same ? "replay reproduced all outputs in " : "replay mismatch; outputs in ") << dir << "\n";
        return same ? 0 : 1;
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-similar wave maps: profiles, spectra, evolution and threshold fits", "wmlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out, "Output directory");
        sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1, 256));
    };

    ProfileCmd profile;
    SpectrumCmd spectrum;
    EvolveCmd evolve;
    ThresholdCmd threshold;
    FitCmd fit;
    ReplayCmd replay;
    auto* p_profile = app.add_subcommand("profile", "Find a self-similar profile f_n");
    auto* p_spectrum = app.add_subcommand("spectrum", "Linear stability spectrum of a profile");
    auto* p_evolve = app.add_subcommand("evolve", "Evolve data in adaptive similarity coordinates");
    auto* p_threshold = app.add_subcommand("threshold", "Bisect the amplitude between dispersion and blowup");
    auto* p_fit = app.add_subcommand("fit", "Fit the three-mode expansion to marginal traces");
    auto* p_replay = app.add_subcommand("replay", "Re-run a manifest and compare its outputs");
    for (auto* sub : {p_profile, p_spectrum, p_evolve, p_threshold, p_fit}) add_common(sub);
    profile.add(p_profile);
    spectrum.add(p_spectrum);
    evolve.add(p_evolve);
    threshold.add(p_threshold);
    fit.add(p_fit);
    replay.add(p_replay);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const std::vector<std::string> rest(args.begin() + 1, args.end());
    try {
        if (*p_profile) return profile.run(common, rest, out);
        if (*p_spectrum) return spectrum.run(common, rest, out);
        if (*p_evolve) return evolve.run(common, rest, out);
        if (*p_threshold) return threshold.run(common, rest, out);
        if (*p_fit) return fit.run(common, rest, out);
        if (*p_replay) return replay.run(out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace wmlab::cli
