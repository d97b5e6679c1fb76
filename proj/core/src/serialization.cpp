#include "wmlab/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace wmlab::io {

using nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json parse(const std::string& text, const char* what) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed ") + what + " document: " + e.what());
    }
}

template <class T>
T field(const ordered_json& j, const char* key, const char* what) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string(what) + " document: missing or invalid field '" + key + "'");
    }
}

void expect_kind(const ordered_json& j, const char* kind) {
    if (!j.is_object() || !j.contains("kind") || j["kind"] != kind) {
        throw ValidationError(std::string("not a ") + kind + " document");
    }
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ordered_json classification_json(const Classification& c) {
    ordered_json j;
    j["outcome"] = is_blowup(c) ? "blowup" : is_dispersion(c) ? "dispersion" : "undecided";
    if (const auto* b = std::get_if<Blowup>(&c)) {
        j["h_limit"] = b->h_limit;
        j["profile_n"] = b->profile_n;
    }
    return j;
}

ordered_json grid_json(const GridSpec& g) {
    return {{"rho_max", g.rho_max}, {"n_points", g.n_points}, {"dissipation_eps", g.dissipation_eps},
            {"rk_tol", g.rk_tol}, {"cfl", g.cfl}};
}

ordered_json fit_json(const FitResult& f) {
    return {{"T_star", f.T_star},
            {"a1", f.a1},
            {"a0", f.a0},
            {"a_minus1", f.a_minus1},
            {"stable_harmonics", f.stable_harmonics},
            {"lambdas", {{"l1", f.lambdas.l1}, {"l0", f.lambdas.l0}, {"lm1", f.lambdas.lm1}}},
            {"f1p0", f.f1p0},
            {"residual", f.residual},
            {"window", {{"s_min", f.window.s_min}, {"s_max", f.window.s_max}}},
            {"condition", f.condition},
            {"samples", f.samples}};
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename onto " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read from " + path.string() + " failed");
    return ss.str();
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

std::string profile_to_text(const SelfSimilarProfile& p) {
    const auto& s = p.settings;
    ordered_json j;
    j["kind"] = "profile";
    j["format"] = kFormatVersion;
    j["id"] = p.id();
    j["d"] = p.d;
    j["n"] = p.n;
    j["c"] = p.c;
    j["branch"] = {{"kind", to_string(kind_of(p.branch))}, {"parameter", branch_parameter(p.branch)}};
    j["f1"] = p.f1;
    j["fp1"] = p.fp1;
    j["fpp1"] = p.fpp1;
    j["match_residual"] = p.match_residual;
    j["settings"] = {{"y0", s.y0},
                     {"delta", s.delta},
                     {"y_mid", s.y_mid},
                     {"ode_tol", s.ode_tol},
                     {"match_tol", s.match_tol},
                     {"origin_order", s.origin_order},
                     {"boundary_order", s.boundary_order},
                     {"scan_points_per_decade", s.scan_points_per_decade},
                     {"max_newton_iterations", s.max_newton_iterations},
                     {"sample_count", s.sample_count}};
    j["origin_series"] = p.origin;
    j["boundary_series"] = p.boundary;
    j["columns"] = {"y", "f", "fp"};
    auto& rows = j["samples"] = ordered_json::array();
    for (const auto& x : p.samples) rows.push_back({x.y, x.f, x.fp});
    return dump(j);
}

SelfSimilarProfile profile_from_text(const std::string& text) {
    constexpr const char* what = "profile";
    const auto j = parse(text, what);
    expect_kind(j, what);
    SelfSimilarProfile p;
    p.d = field<int>(j, "d", what);
    (void)Dimension(p.d);
    p.n = field<int>(j, "n", what);
    p.c = field<double>(j, "c", what);
    const auto& b = j.at("branch");
    p.branch = make_branch(branch_kind_from_string(field<std::string>(b, "kind", what)),
                           field<double>(b, "parameter", what));
    p.f1 = field<double>(j, "f1", what);
    p.fp1 = field<double>(j, "fp1", what);
    p.fpp1 = field<double>(j, "fpp1", what);
    p.match_residual = field<double>(j, "match_residual", what);
    const auto& s = j.at("settings");
    p.settings.y0 = field<double>(s, "y0", what);
    p.settings.delta = field<double>(s, "delta", what);
    p.settings.y_mid = field<double>(s, "y_mid", what);
    p.settings.ode_tol = field<double>(s, "ode_tol", what);
    p.settings.match_tol = field<double>(s, "match_tol", what);
    p.settings.origin_order = field<int>(s, "origin_order", what);
    p.settings.boundary_order = field<int>(s, "boundary_order", what);
    p.settings.scan_points_per_decade = field<int>(s, "scan_points_per_decade", what);
    p.settings.max_newton_iterations = field<int>(s, "max_newton_iterations", what);
    p.settings.sample_count = field<int>(s, "sample_count", what);
    p.origin = field<series::Coeffs>(j, "origin_series", what);
    p.boundary = field<series::Coeffs>(j, "boundary_series", what);
    for (const auto& row : j.at("samples")) {
        if (!row.is_array() || row.size() != 3) throw ValidationError("profile document: bad sample row");
        p.samples.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
    }
    if (p.samples.size() < 4) throw ValidationError("profile document: too few samples");
    for (std::size_t i = 1; i < p.samples.size(); ++i) {
        if (!(p.samples[i].y > p.samples[i - 1].y)) throw ValidationError("profile document: samples not increasing in y");
    }
    return p;
}

void save_profile(const std::filesystem::path& path, const SelfSimilarProfile& p) { write_atomic(path, profile_to_text(p)); }

SelfSimilarProfile load_profile(const std::filesystem::path& path) { return profile_from_text(read_file(path)); }

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

std::string spectrum_to_text(const SpectrumReport& s, double f1p0) {
    ordered_json j;
    j["kind"] = "spectrum";
    j["format"] = kFormatVersion;
    j["profile_id"] = s.profile_id;
    j["d"] = s.d;
    j["n"] = s.n;
    j["profile_c"] = f1p0;
    j["range"] = {s.range.first, s.range.second};
    j["gauge_residual"] = s.gauge_residual;
    j["count_above_dm2"] = s.count_above_dm2;
    j["count_at_dm2"] = s.count_at_dm2;
    j["sturm_count"] = s.sturm_count;
    j["eigenvalues"] = s.eigenvalues();
    auto& pairs = j["eigenpairs"] = ordered_json::array();
    for (const auto& e : s.eigenpairs) {
        ordered_json pj{{"lambda", e.lambda}, {"mu", e.mu}, {"residual", e.residual}};
        if (!e.v_samples.empty()) {
            pj["columns"] = {"y", "v", "vp"};
            auto& rows = pj["samples"] = ordered_json::array();
            for (const auto& x : e.v_samples) rows.push_back({x.y, x.v, x.vp});
        }
        pairs.push_back(std::move(pj));
    }
    return dump(j);
}

SpectrumReport spectrum_from_text(const std::string& text, double* f1p0) {
    constexpr const char* what = "spectrum";
    const auto j = parse(text, what);
    expect_kind(j, what);
    SpectrumReport s;
    s.profile_id = field<std::string>(j, "profile_id", what);
    s.d = field<int>(j, "d", what);
    s.n = field<int>(j, "n", what);
    const auto range = field<std::vector<double>>(j, "range", what);
    if (range.size() != 2) throw ValidationError("spectrum document: range needs two values");
    s.range = {range[0], range[1]};
    s.gauge_residual = field<double>(j, "gauge_residual", what);
    s.count_above_dm2 = field<int>(j, "count_above_dm2", what);
    s.count_at_dm2 = field<int>(j, "count_at_dm2", what);
    s.sturm_count = field<int>(j, "sturm_count", what);
    for (const auto& pj : j.at("eigenpairs")) {
        EigenPair e;
        e.lambda = field<double>(pj, "lambda", what);
        e.mu = field<double>(pj, "mu", what);
        e.residual = field<double>(pj, "residual", what);
        if (pj.contains("samples")) {
            for (const auto& row : pj["samples"]) e.v_samples.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
        }
        s.eigenpairs.push_back(std::move(e));
    }
    if (f1p0) *f1p0 = field<double>(j, "profile_c", what);
    return s;
}

void save_spectrum(const std::filesystem::path& path, const SpectrumReport& s, double f1p0) {
    write_atomic(path, spectrum_to_text(s, f1p0));
}

SpectrumReport load_spectrum(const std::filesystem::path& path, double* f1p0) {
    return spectrum_from_text(read_file(path), f1p0);
}

// ---------------------------------------------------------------------------
// Traces and series
// ---------------------------------------------------------------------------

std::string trace_to_csv(const RunTrace& trace) {
    std::string out = "tau,h,dV0,dP0,t\n";
    for (const auto& s : trace.samples) {
        out += fmt(s.tau) + ',' + fmt(s.h) + ',' + fmt(s.dV0) + ',' + fmt(s.dP0) + ',' + fmt(s.t) + '\n';
    }
    return out;
}

RunTrace trace_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("tau,h,dV0,dP0,t", 0) != 0) {
        throw ValidationError("trace CSV must start with the header tau,h,dV0,dP0,t");
    }
    RunTrace trace;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        TraceSample s;
        double* dst[5] = {&s.tau, &s.h, &s.dV0, &s.dP0, &s.t};
        std::size_t pos = 0;
        for (int k = 0; k < 5; ++k) {
            const std::size_t end = line.find(',', pos);
            if ((k < 4) == (end == std::string::npos)) {
                throw ValidationError("trace CSV line " + std::to_string(lineno) + ": expected five columns");
            }
            try {
                *dst[k] = std::stod(line.substr(pos, end - pos));
            } catch (const std::exception&) {
                throw ValidationError("trace CSV line " + std::to_string(lineno) + ": not a number");
            }
            pos = end + 1;
        }
        trace.samples.push_back(s);
    }
    return trace;
}

void save_trace(const std::filesystem::path& path, const RunTrace& trace) { write_atomic(path, trace_to_csv(trace)); }

RunTrace load_trace(const std::filesystem::path& path) { return trace_from_csv(read_file(path)); }

std::string snapshots_to_csv(const std::vector<Snapshot>& snapshots, const GridSpec& grid) {
    std::string out = "tau,rho,V,P\n";
    for (const auto& s : snapshots) {
        for (std::size_t i = 0; i < s.V.size(); ++i) {
            out += fmt(s.tau) + ',' + fmt(grid.rho(static_cast<int>(i))) + ',' + fmt(s.V[i]) + ',' + fmt(s.P[i]) + '\n';
        }
    }
    return out;
}

std::string similarity_to_csv(const std::vector<SimilaritySample>& series, const FitResult* fit) {
    std::string out = fit ? "s,dU0,tau,fit,mode1,mode0,mode_minus1\n" : "s,dU0,tau\n";
    for (const auto& x : series) {
        out += fmt(x.s) + ',' + fmt(x.dU0) + ',' + fmt(x.tau);
        if (fit) {
            const double m1 = fit->a1 * std::exp(fit->lambdas.l1 * x.s);
            const double m0 = fit->a0 * std::exp(fit->lambdas.l0 * x.s);
            out += ',' + fmt(fit->model(x.s)) + ',' + fmt(m1) + ',' + fmt(m0) + ','
                   + fmt(fit->model(x.s) - fit->f1p0 - m1 - m0);
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string classification_to_text(const Classification& c) { return classification_json(c).dump(); }

std::string grid_to_text(const GridSpec& g) { return grid_json(g).dump(); }

std::string threshold_to_text(const ThresholdResult& r, const std::string& manifest_id) {
    ordered_json j;
    j["kind"] = "threshold";
    j["format"] = kFormatVersion;
    j["manifest_id"] = manifest_id;
    j["d"] = r.d;
    j["A_lo"] = r.A_lo;
    j["A_hi"] = r.A_hi;
    j["A_star"] = r.A_star;
    j["relative_width"] = (r.A_hi - r.A_lo) / r.A_star;
    j["iterations"] = r.n_iters;
    j["lo_disperses"] = r.lo_disperses;
    auto& h = j["history"] = ordered_json::array();
    for (const auto& s : r.history) {
        ordered_json sj{{"amplitude", s.amplitude}, {"width", s.width}, {"plateau_length", s.plateau_length},
                        {"tau_reached", s.tau_reached}};
        sj["classification"] = classification_json(s.classification);
        h.push_back(std::move(sj));
    }
    return dump(j);
}

std::string fit_to_text(const FitResult& f, const std::string& manifest_id) {
    ordered_json j;
    j["kind"] = "fit";
    j["format"] = kFormatVersion;
    j["manifest_id"] = manifest_id;
    j.update(fit_json(f));
    return dump(j);
}

FitResult fit_from_text(const std::string& text) {
    constexpr const char* what = "fit";
    const auto j = parse(text, what);
    expect_kind(j, what);
    FitResult f;
    f.T_star = field<double>(j, "T_star", what);
    f.a1 = field<double>(j, "a1", what);
    f.a0 = field<double>(j, "a0", what);
    f.a_minus1 = field<double>(j, "a_minus1", what);
    if (j.contains("stable_harmonics")) f.stable_harmonics = field<std::vector<double>>(j, "stable_harmonics", what);
    const auto& l = j.at("lambdas");
    f.lambdas = {field<double>(l, "l1", what), field<double>(l, "l0", what), field<double>(l, "lm1", what)};
    f.f1p0 = field<double>(j, "f1p0", what);
    f.residual = field<double>(j, "residual", what);
    const auto& w = j.at("window");
    f.window = {field<double>(w, "s_min", what), field<double>(w, "s_max", what)};
    f.condition = field<double>(j, "condition", what);
    f.samples = field<std::size_t>(j, "samples", what);
    return f;
}

std::string free_rate_fit_to_text(const FreeRateFit& f, const std::string& manifest_id) {
    ordered_json j;
    j["kind"] = "free_rate_fit";
    j["format"] = kFormatVersion;
    j["manifest_id"] = manifest_id;
    j["T"] = f.T;
    j["lambda1"] = f.lambda1;
    j["lambda_minus1"] = f.lambda_minus1;
    j["growth"] = {{"residual", f.growth_residual}, {"samples", f.growth_samples},
                   {"s_min", f.growth_window.s_min}, {"s_max", f.growth_window.s_max}};
    j["decay"] = {{"residual", f.decay_residual}, {"samples", f.decay_samples},
                  {"s_min", f.decay_window.s_min}, {"s_max", f.decay_window.s_max}};
    return dump(j);
}

}  // namespace wmlab::io
