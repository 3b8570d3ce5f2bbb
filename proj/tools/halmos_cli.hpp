#pragma once

// halmos-kit command line: analyze / verify / element / random.
//
// Exit codes: 0 ok, 1 parse or I/O error, 2 validation failure,
// 3 verification mismatch, 4 word syntax error.
//
// run_cli is kept separate from main so the tests can drive it in-process.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "halmos/halmos.hpp"
#include "halmos/oracle.hpp"

namespace halmos::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "halmos-kit/1";

enum ExitCode : int { Ok = 0, ParseError = 1, ValidationError = 2, VerifyMismatch = 3, WordError = 4 };

struct CliError : std::runtime_error {
    CliError(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

// ---- numbers ---------------------------------------------------------------

// Report numbers: 12 significant digits, |x| < 1e-14 printed as 0 so that
// round-off does not leak into golden files. Non-finite values become null.
inline json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    if (std::abs(x) < 1e-14) return 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

inline json num(Complex z) { return json::array({num(z.real()), num(z.imag())}); }

template <class T>
json num_list(const std::vector<T>& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back(num(x));
    return a;
}

// ---- MatrixFile ------------------------------------------------------------

inline CMatrix matrix_from_json(const json& doc, const std::string& where) {
    auto bad = [&](const std::string& why) { return CliError(ParseError, where + ": " + why); };
    if (!doc.is_object()) throw bad("expected an object");
    if (!doc.contains("rows") || !doc["rows"].is_number_integer() || !doc.contains("cols") ||
        !doc["cols"].is_number_integer())
        throw bad("missing integer rows/cols");
    const auto rows = doc["rows"].get<long long>();
    const auto cols = doc["cols"].get<long long>();
    if (rows < 0 || cols < 0) throw bad("negative size");
    if (!doc.contains("entries") || !doc["entries"].is_array()) throw bad("missing entries array");
    const json& e = doc["entries"];
    if (static_cast<long long>(e.size()) != rows * cols)
        throw bad("expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(e.size()));
    CMatrix m(rows, cols);
    for (long long k = 0; k < rows * cols; ++k) {
        const json& z = e[static_cast<std::size_t>(k)];
        if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
            throw bad("entry " + std::to_string(k) + " is not [re, im]");
        m(k / cols, k % cols) = Complex(z[0].get<double>(), z[1].get<double>());
    }
    return m;
}

inline json matrix_to_json(const CMatrix& m) {
    json entries = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back({m(r, c).real(), m(r, c).imag()});
    json doc;
    doc["rows"] = m.rows();
    doc["cols"] = m.cols();
    doc["entries"] = std::move(entries);
    return doc;
}

/// Rounded copy for reports (MatrixFiles written by `random` keep full precision).
inline json matrix_to_report(const CMatrix& m) {
    json doc = matrix_to_json(m);
    for (auto& z : doc["entries"]) z = num(Complex(z[0].get<double>(), z[1].get<double>()));
    return doc;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError(ParseError, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw CliError(ParseError, path + ": " + e.what());
    }
}

inline void write_json_file(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError(ParseError, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw CliError(ParseError, "write failed: " + path.string());
}

// ---- report sections -------------------------------------------------------

inline json dims_json(const Dims& d) {
    return json{{"d00", d.d00}, {"d01", d.d01}, {"d10", d.d10}, {"d11", d.d11}, {"m", d.m}};
}

// max over a of the distance to the nearest b, symmetrized.
inline double hausdorff(const std::vector<double>& a, const std::vector<double>& b) {
    auto one_way = [](const std::vector<double>& xs, const std::vector<double>& ys) {
        double worst = 0.0;
        for (double x : xs) {
            double best = std::numeric_limits<double>::infinity();
            for (double y : ys) best = std::min(best, std::abs(x - y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    if (a.empty() != b.empty()) return std::numeric_limits<double>::infinity();
    return std::max(one_way(a, b), one_way(b, a));
}

inline double hausdorff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    auto one_way = [](const std::vector<Complex>& xs, const std::vector<Complex>& ys) {
        double worst = 0.0;
        for (Complex x : xs) {
            double best = std::numeric_limits<double>::infinity();
            for (Complex y : ys) best = std::min(best, std::abs(x - y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    if (a.empty() != b.empty()) return std::numeric_limits<double>::infinity();
    return std::max(one_way(a, b), one_way(b, a));
}

inline std::vector<double> eigenvalues(const CMatrix& m) {
    const RVector v = hermitian_eig(m).values;
    return {v.data(), v.data() + v.size()};
}

struct VerifyLedger {
    json items = json::object();
    bool pass = true;

    void add(const std::string& name, double delta, double tolerance) {
        const bool ok = std::isfinite(delta) && delta <= tolerance;
        items[name] = json{{"delta", num(delta)}, {"tolerance", num(tolerance)}, {"pass", ok}};
        pass = pass && ok;
    }
    void skip(const std::string& name, const std::string& why) {
        items[name] = json{{"delta", nullptr}, {"skipped", why}};
    }
    json to_json() const { return json{{"pass", pass}, {"items", items}}; }
};

struct Loaded {
    ProjectionPair pair;
    HalmosDecomposition dec;
};

inline Loaded load_pair(const std::string& path_p, const std::string& path_q, const Tolerances& tol) {
    const CMatrix p = matrix_from_json(read_json_file(path_p), path_p);
    const CMatrix q = matrix_from_json(read_json_file(path_q), path_q);
    ProjectionPair pair = validate_pair(p, q, tol);
    HalmosDecomposition dec = halmos_decompose(pair, tol);
    return {std::move(pair), std::move(dec)};
}

inline json validation_json(const ProjectionPair& pair, const HalmosDecomposition& dec, const Tolerances& tol) {
    const CMatrix& p = pair.p();
    const CMatrix& q = pair.q();
    const CMatrix a = pair.difference(), b = pair.complement_sum();
    const ProjectionPair back = reconstruct(dec, tol.scaled(10.0));
    return json{
        {"n", pair.size()},
        {"hermitianDefect", {{"P", num(hermitian_defect(p))}, {"Q", num(hermitian_defect(q))}}},
        {"idempotentDefect", {{"P", num(max_abs(p * p - p))}, {"Q", num(max_abs(q * q - q))}}},
        {"supersymmetry",
         {{"squares", num(max_abs(a * a + b * b - identity(pair.size())))}, {"anticommutator", num(max_abs(a * b + b * a))}}},
        {"basisUnitarity", num(unitarity_defect(dec.basis))},
        {"reconstruction", num(std::max(max_abs(back.p() - p), max_abs(back.q() - q)))},
    };
}

inline json analyze_report(const ProjectionPair& pair, const HalmosDecomposition& dec, const Tolerances& tol,
                           bool verify, bool& verified) {
    const PairReport r = analyze_pair(dec);
    const Eigen::Index n = pair.size();
    json doc;
    doc["version"] = kVersion;
    doc["validation"] = validation_json(pair, dec, tol);
    doc["dims"] = dims_json(r.dims);
    doc["hValues"] = num_list(r.h_values);
    doc["diffSpectrum"] = num_list(r.diff_spectrum);
    doc["anticommutator"] = json{{"spectrum", num_list(r.anticommutator.spectrum)},
                                 {"norm", num(r.anticommutator.norm)},
                                 {"pqNorm", num(r.anticommutator.pq_norm)},
                                 {"normIdentityResidual", num(r.anticommutator.walters_residual)}};
    doc["index"] = json{{"fredholm", r.fredholm_index}, {"invertibilityMargin", num(r.invertibility_margin)}};
    json traces = json::object();
    for (const auto& [k, v] : r.trace_powers) traces[std::to_string(k)] = num(v);
    doc["tracePowers"] = traces;
    doc["distance"] = json{{"x", num(r.distance.x)}, {"value", num(r.distance.value)},
                           {"regime", to_string(r.distance.regime)}};
    json inter{{"exists", r.intertwiner_exists}, {"residuals", nullptr}};
    IntertwinerResiduals ir;
    if (r.intertwiner_exists) {
        ir = intertwiner_residuals(build_intertwiner(dec), pair.p(), pair.q());
        inter["residuals"] = json{{"unitarity", num(ir.unitarity)}, {"upQu", num(ir.up_qu)}, {"uqPu", num(ir.uq_pu)}};
    }
    doc["intertwiner"] = inter;

    verified = true;
    if (!verify) return doc;

    // Oracle deltas: every formula item against a brute-force recomputation.
    // These tolerances are fixed; --tol only widens what is accepted as input.
    const CMatrix& p = pair.p();
    const CMatrix& q = pair.q();
    const CMatrix id = identity(n);
    const double dn = static_cast<double>(std::max<Eigen::Index>(1, n));
    VerifyLedger v;
    const ProjectionPair back = reconstruct(dec, tol.scaled(10.0));
    v.add("reconstruction", std::max(max_abs(back.p() - p), max_abs(back.q() - q)), 1e-8);
    v.add("diffSpectrum", hausdorff(r.diff_spectrum, eigenvalues(pair.difference())), 1e-8);
    v.add("anticommutator.spectrum", hausdorff(r.anticommutator.spectrum, eigenvalues(p * q + q * p)), 1e-8);
    v.add("anticommutator.norm", std::abs(r.anticommutator.norm - spectral_norm(p * q + q * p)), 1e-9);
    v.add("anticommutator.pqNorm", std::abs(r.anticommutator.pq_norm - spectral_norm(p * q)), 1e-9);
    v.add("index", std::abs(double(r.fredholm_index - oracle::brute_index(p, q))), 0.0);
    double trace_delta = 0.0;
    for (const auto& [k, value] : r.trace_powers)
        trace_delta = std::max(trace_delta, std::abs(value - oracle::matrix_power(pair.difference(), k).trace().real()));
    v.add("tracePowers", trace_delta, 1e-8);
    v.add("distance.x", std::abs(r.distance.x - spectral_norm(p * (2.0 * q - id) * p)), 1e-9);
    if (r.dims.m <= 2)
        v.add("distance.value", std::abs(r.distance.value - oracle::brute_distance(p, q, 400)), 1e-4);
    else
        v.skip("distance.value", "search oracle limited to m <= 2");
    if (r.intertwiner_exists)
        v.add("intertwiner.residuals", std::max({ir.unitarity, ir.up_qu, ir.uq_pu}), 1e-8 * dn);
    else
        v.skip("intertwiner.residuals", "no intertwiner: dim M01 != dim M10");
    doc["verify"] = v.to_json();
    verified = v.pass;
    return doc;
}

// ---- element ---------------------------------------------------------------

inline const std::vector<std::string>& all_element_ops() {
    static const std::vector<std::string> ops{"spectrum", "norm", "trace", "rank", "kernel", "pinv", "drazin", "cor"};
    return ops;
}

inline json element_report(const ProjectionPair& pair, const HalmosDecomposition& dec, const std::string& word,
                           const std::vector<std::string>& ops, const Tolerances& tol, bool verify, bool& verified) {
    const WordExpression expr = WordExpression::parse(word);
    const auto ptr = std::make_shared<const HalmosDecomposition>(dec);
    const AlgebraElement x = expr.evaluate<AlgebraElement>(AlgebraElement::p_symbol(ptr), AlgebraElement::q_symbol(ptr),
                                                           AlgebraElement::identity(ptr));
    const CMatrix direct = expr.evaluate<CMatrix>(pair.p(), pair.q(), identity(pair.size()));
    const double rank_tol = 1e-8;

    json doc;
    doc["version"] = kVersion;
    doc["word"] = word;
    doc["dims"] = dims_json(dec.dims);
    doc["hValues"] = num_list(dec.h_values);
    json coeffs = json::object();
    const char* names[4] = {"a00", "a01", "a10", "a11"};
    for (int b = 0; b < 4; ++b) coeffs[names[b]] = x.coefficients()[b] ? num(*x.coefficients()[b]) : json(nullptr);
    json fibers = json::array();
    for (const Fiber& f : x.fibers()) {
        json phi = json::array();
        for (int r = 0; r < 2; ++r) phi.push_back({num(f.phi(r, 0)), num(f.phi(r, 1))});
        fibers.push_back({{"lambda", num(f.lambda)}, {"phi", phi}});
    }
    doc["element"] = json{{"coefficients", coeffs}, {"fibers", fibers}};

    const double scale = std::max(1.0, operator_norm(x));
    VerifyLedger v;
    v.add("assemble", max_abs(assemble(x) - direct), 1e-8 * scale);
    json answers = json::object();
    for (const std::string& op : ops) {
        if (op == "spectrum") {
            const auto s = spectrum(x);
            answers["spectrum"] = num_list(s);
            v.add("spectrum", hausdorff(s, oracle::brute_spectrum(direct)), 1e-6 * scale);
        } else if (op == "norm") {
            answers["norm"] = num(operator_norm(x));
            v.add("norm", std::abs(operator_norm(x) - spectral_norm(direct)), 1e-9 * scale);
        } else if (op == "trace") {
            answers["trace"] = num(trace(x));
            v.add("trace", std::abs(trace(x) - direct.trace()), 1e-9 * scale);
        } else if (op == "rank") {
            const FiberRankProfile p = rank_profile(x, rank_tol);
            json ranks = json::array();
            for (int r : p.ranks) ranks.push_back(r);
            answers["rank"] = json{{"fiberRanks", ranks},
                                   {"delta0", p.delta0.size()},
                                   {"delta10", p.delta10.size()},
                                   {"delta11", p.delta11.size()},
                                   {"delta2", p.delta2.size()},
                                   {"indeterminate", p.indeterminate}};
        } else if (op == "kernel") {
            const SubspaceBasis k = kernel_basis(x, rank_tol);
            answers["kernel"] = json{{"dim", k.dim()}, {"basis", matrix_to_report(k.columns())}};
            v.add("kernel", max_principal_sine(k, null_basis(direct, rank_tol)), 1e-7);
        } else if (op == "pinv") {
            const CMatrix g = assemble(moore_penrose(x, rank_tol));
            answers["pinv"] = matrix_to_report(g);
            v.add("pinv", max_abs(g - oracle::brute_pinv(direct, rank_tol)), 1e-6 * scale);
        } else if (op == "drazin") {
            const DrazinResult d = drazin(x, rank_tol);
            const CMatrix xd = assemble(d.inverse);
            answers["drazin"] = json{{"index", d.index},
                                     {"detMin", num(d.det_min)},
                                     {"traceMin", num(d.trace_min)},
                                     {"inverse", matrix_to_report(xd)}};
            v.add("drazin", max_abs(xd - oracle::brute_drazin(direct, 2)), 1e-6 * scale);
        } else if (op == "cor") {
            const CorResult c = is_cor(x, rank_tol);
            answers["cor"] = json{{"holds", c.holds}, {"indeterminate", c.indeterminate}};
            if (c.indeterminate) v.skip("cor", "borderline margin");
            else v.add("cor", c.holds == oracle::brute_cor(direct, rank_tol) ? 0.0 : 1.0, 0.0);
        } else {
            throw CliError(ParseError, "unknown op '" + op + "'");
        }
    }
    doc["answers"] = answers;
    verified = true;
    if (verify) {
        doc["verify"] = v.to_json();
        verified = v.pass;
    }
    return doc;
}

// ---- random ----------------------------------------------------------------

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

inline double parse_double(const std::string& s, const char* flag) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw CliError(ParseError, std::string(flag) + ": not a number: '" + s + "'");
    return v;
}

inline long long parse_count(const std::string& s, const char* flag) {
    std::size_t used = 0;
    long long v = -1;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || v < 0)
        throw CliError(ParseError, std::string(flag) + ": not a non-negative integer: '" + s + "'");
    return v;
}

inline RandomPairSpec parse_spec(const std::string& dims, long long m, const std::string& h, std::uint64_t seed) {
    const auto d = split_commas(dims);
    if (d.size() != 4) throw CliError(ParseError, "--dims expects d00,d01,d10,d11");
    RandomPairSpec spec;
    spec.dims.d00 = parse_count(d[0], "--dims");
    spec.dims.d01 = parse_count(d[1], "--dims");
    spec.dims.d10 = parse_count(d[2], "--dims");
    spec.dims.d11 = parse_count(d[3], "--dims");
    if (m < 0) throw CliError(ParseError, "--m must be non-negative");
    spec.dims.m = m;
    if (!h.empty())
        for (const auto& t : split_commas(h)) spec.h_values.push_back(parse_double(t, "--h"));
    spec.seed = seed;
    return spec;
}

// ---- driver ----------------------------------------------------------------

inline std::string help_footer() {
    const Tolerances t;
    std::ostringstream s;
    s << "Default tolerance family (multiplied by --tol or HALMOS_TOL):\n"
      << "  orth " << t.orth << ", hermitian " << t.hermitian << ", idempotent " << t.idempotent << ", gap " << t.gap
      << ",\n  gray " << t.gray << ", rank " << t.rank << ", residual " << t.residual << " (per dimension)\n"
      << "Exit codes: 0 ok, 1 parse/IO, 2 validation, 3 verify mismatch, 4 word syntax.";
    return s.str();
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Canonical form of a pair of orthogonal projections", "halmos-kit"};
    app.footer(help_footer());
    app.require_subcommand(1);
    app.fallthrough();  // --tol is accepted after the subcommand too

    double factor = 1.0;
    app.add_option("--tol", factor, "scale the default tolerance family")
        ->envname("HALMOS_TOL")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::string path_p, path_q, word, ops_list, dims, h_list, out_dir;
    bool verify_flag = false;
    long long m = 0;
    std::uint64_t seed = 0;

    auto add_pair_args = [&](CLI::App* sub) {
        sub->add_option("P", path_p, "MatrixFile for P")->required();
        sub->add_option("Q", path_q, "MatrixFile for Q")->required();
    };
    CLI::App* analyze = app.add_subcommand("analyze", "decompose a pair and print the Report");
    add_pair_args(analyze);
    analyze->add_flag("--verify", verify_flag, "cross-check every item against brute-force oracles");
    CLI::App* verify = app.add_subcommand("verify", "alias for analyze --verify");
    add_pair_args(verify);
    CLI::App* element = app.add_subcommand("element", "analyze an element of the generated algebra");
    add_pair_args(element);
    element->add_option("--word", word, "expression in P, Q, I, e.g. \"P*Q + (1-2i)*Q\"")->required();
    element->add_option("--ops", ops_list, "comma list of spectrum,norm,trace,rank,kernel,pinv,drazin,cor");
    element->add_flag("--verify", verify_flag, "cross-check answers against brute-force oracles");
    CLI::App* random = app.add_subcommand("random", "write a random pair with known canonical form");
    random->set_help_flag("--help", "print this help and exit");  // frees -h; --h is taken
    random->add_option("--dims", dims, "d00,d01,d10,d11")->required();
    random->add_option("--m", m, "number of 2x2 fibers")->required();
    random->add_option("--h", h_list, "comma list of m values in (0, 1)");
    random->add_option("--seed", seed, "RNG seed")->required();
    random->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "halmos-kit: " << e.what() << '\n';
        return ParseError;
    }

    const Tolerances tol = Tolerances{}.scaled(factor);
    try {
        if (analyze->parsed() || verify->parsed()) {
            const Loaded l = load_pair(path_p, path_q, tol);
            bool ok = true;
            const json doc = analyze_report(l.pair, l.dec, tol, verify_flag || verify->parsed(), ok);
            out << doc.dump(2) << '\n';
            if (!ok) {
                err << "halmos-kit: verification failed\n";
                return VerifyMismatch;
            }
            return Ok;
        }
        if (element->parsed()) {
            std::vector<std::string> ops = ops_list.empty() ? all_element_ops() : split_commas(ops_list);
            WordExpression::parse(word);  // syntax errors before any file I/O
            const Loaded l = load_pair(path_p, path_q, tol);
            bool ok = true;
            const json doc = element_report(l.pair, l.dec, word, ops, tol, verify_flag, ok);
            out << doc.dump(2) << '\n';
            if (!ok) {
                err << "halmos-kit: verification failed\n";
                return VerifyMismatch;
            }
            return Ok;
        }
        if (random->parsed()) {
            const RandomPairSpec spec = parse_spec(dims, m, h_list, seed);
            const GeneratedPair g = generate_pair(spec, tol);
            const std::filesystem::path dir(out_dir);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw CliError(ParseError, "cannot create " + out_dir + ": " + ec.message());
            write_json_file(dir / "P.json", matrix_to_json(g.pair.p()));
            write_json_file(dir / "Q.json", matrix_to_json(g.pair.q()));
            json truth;
            truth["version"] = kVersion;
            truth["seed"] = spec.seed;
            truth["dims"] = dims_json(g.truth.dims);
            truth["hValues"] = g.truth.h_values;
            truth["basis"] = matrix_to_json(g.truth.basis);
            write_json_file(dir / "truth.json", truth);
            out << json{{"version", kVersion}, {"P", (dir / "P.json").string()}, {"Q", (dir / "Q.json").string()},
                        {"truth", (dir / "truth.json").string()}}
                       .dump(2)
                << '\n';
            return Ok;
        }
    } catch (const CliError& e) {
        err << "halmos-kit: " << e.what() << '\n';
        return e.code;
    } catch (const WordSyntaxError& e) {
        err << "halmos-kit: word syntax error at " << e.what() << '\n';
        return WordError;
    } catch (const Error& e) {
        err << "halmos-kit: " << e.what() << '\n';
        return ValidationError;
    } catch (const std::exception& e) {
        err << "halmos-kit: " << e.what() << '\n';
        return ParseError;
    }
    return ParseError;
}

} // namespace halmos::cli
