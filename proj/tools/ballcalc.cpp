// Command-line front end: basis/kernel validation, maximal fields, norms,
// and the experiment harness. Exit codes: 0 clean, 1 invariant violation,
// 2 usage or config error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ballcalc/basis.hpp"
#include "ballcalc/csv.hpp"
#include "ballcalc/functional.hpp"
#include "ballcalc/kernel.hpp"
#include "ballcalc/maximal.hpp"
#include "ballcalc/space.hpp"
#include "ballcalc/verify.hpp"

namespace {

using namespace ballcalc;

struct BasisOpts {
    std::string preset = "dyadic";
    int levels = 6;
    int d = 1;
    int n = 64;
    std::string shape = "cube";
    std::string mode = "centered";
    int leaves = 24;
    std::uint64_t tree_seed = 1;
};

void attach_basis_opts(CLI::App* cmd, BasisOpts& o) {
    cmd->add_option("--preset", o.preset, "basis family: dyadic | grid | martingale")
        ->check(CLI::IsMember({"dyadic", "grid", "martingale"}));
    cmd->add_option("--levels", o.levels, "dyadic levels L");
    cmd->add_option("--d", o.d, "grid dimension (1 or 2)");
    cmd->add_option("--n", o.n, "grid points per axis");
    cmd->add_option("--shape", o.shape, "grid ball shape: cube | ball")
        ->check(CLI::IsMember({"cube", "ball"}));
    cmd->add_option("--mode", o.mode, "per-point family: centered | uncentered")
        ->check(CLI::IsMember({"centered", "uncentered"}));
    cmd->add_option("--leaves", o.leaves, "martingale leaf count");
    cmd->add_option("--tree-seed", o.tree_seed, "martingale tree seed");
}

std::pair<std::shared_ptr<const MeasureSpace>, BallBasis> build_basis(const BasisOpts& o) {
    if (o.preset == "dyadic") return dyadic_basis(o.levels);
    if (o.preset == "grid") {
        GridShape shape = o.shape == "ball" ? GridShape::ball : GridShape::cube;
        BallBasis::Mode mode =
            o.mode == "uncentered" ? BallBasis::Mode::uncentered : BallBasis::Mode::centered;
        return grid_torus_basis(o.d, o.n, shape, mode);
    }
    if (o.preset == "martingale")
        return random_martingale_basis(static_cast<std::size_t>(o.leaves), o.tree_seed);
    throw std::invalid_argument("unknown basis preset: " + o.preset);
}

/// Kernel specs: indicator | weighted:geometric:<q> | weighted:alpha:a0,a1,...
/// | conv:power:<p> | conv:indicator | conv:table:<csv> | fejer:m1,m2,...
KernelStructure build_kernels(const BallBasis& basis, const std::string& spec) {
    if (spec == "indicator") return indicator_kernels(basis);
    if (spec.rfind("weighted:", 0) == 0) {
        std::vector<double> alpha = parse_alpha_preset(spec.substr(9), basis.tree_levels());
        return dyadic_weighted_kernels(basis, alpha);
    }
    if (spec.rfind("conv:table:", 0) == 0) {
        // two-column csv: s,value
        std::ifstream in(spec.substr(11));
        if (!in) throw std::invalid_argument("cannot read profile table " + spec.substr(11));
        std::vector<std::pair<double, double>> samples;
        for (const auto& row : csv::read_all(in)) {
            if (row.size() != 2)
                throw std::invalid_argument("profile table rows must be `s,value`");
            if (row[0] == "s" || row[0] == "index") continue;  // optional header
            samples.emplace_back(std::stod(row[0]), std::stod(row[1]));
        }
        return convolution_kernels(basis, RadialProfile::from_samples(std::move(samples)));
    }
    if (spec.rfind("conv:", 0) == 0)
        return convolution_kernels(basis, RadialProfile::parse(spec.substr(5)));
    if (spec.rfind("fejer:", 0) == 0) {
        std::vector<int> degrees;
        std::stringstream ss(spec.substr(6));
        std::string item;
        while (std::getline(ss, item, ',')) degrees.push_back(std::stoi(item));
        return fejer_kernels(basis, degrees);
    }
    throw std::invalid_argument("unknown kernel spec: " + spec);
}

std::ofstream open_out(const std::string& dir, const std::string& file) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / file, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write to " + dir + "/" + file);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

/// Expands `--config FILE` into injected `--key=value` tokens right after
/// the subcommand, so explicit command-line flags (which come later) win.
/// The file is flat `key = value` text; '#' starts a comment.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::vector<std::string> out;
    std::vector<std::string> injected;
    std::size_t insert_at = std::min<std::size_t>(2, args.size());  // after the subcommand

    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string value;
        bool is_config = false;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file");
            value = args[++i];
            is_config = true;
        } else if (args[i].rfind("--config=", 0) == 0) {
            value = args[i].substr(9);
            is_config = true;
        }
        if (!is_config) {
            out.push_back(args[i]);
            continue;
        }
        if (!injected.empty()) throw std::invalid_argument("--config given twice");
        std::ifstream in(value);
        if (!in) throw std::invalid_argument("cannot read config file " + value);
        std::string line;
        while (std::getline(in, line)) {
            std::string stripped = trim(line.substr(0, line.find('#')));
            if (stripped.empty()) continue;
            std::size_t eq = stripped.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line is not `key = value`: " + line);
            std::string key = trim(stripped.substr(0, eq));
            std::string val = trim(stripped.substr(eq + 1));
            if (key.empty()) throw std::invalid_argument("config line has an empty key: " + line);
            injected.push_back("--" + key + "=" + val);
        }
    }
    out.insert(out.begin() + static_cast<long>(std::min(insert_at, out.size())), injected.begin(),
               injected.end());
    return out;
}

int run_validate_basis(const BasisOpts& bo, const std::string& out_dir, bool dump) {
    auto [space, basis] = build_basis(bo);
    BasisValidation report = validate_axioms(basis);
    std::cout << report.to_text();
    if (!out_dir.empty()) {
        auto f = open_out(out_dir, "validate-basis.csv");
        report.write_csv(f);
        if (dump) {
            auto g = open_out(out_dir, "basis.csv");
            basis.write_csv(g);
        }
    }
    return report.core_pass() ? 0 : 1;
}

int run_validate_kernel(const BasisOpts& bo, const std::string& kernel_spec,
                        const std::string& out_dir, bool dump) {
    auto [space, basis] = build_basis(bo);
    KernelStructure ks = build_kernels(basis, kernel_spec);
    KernelValidation report = validate_kernels(ks, basis);
    std::cout << report.to_text();
    if (!out_dir.empty()) {
        auto f = open_out(out_dir, "validate-kernel.csv");
        report.write_csv(f);
        if (dump) {
            auto g = open_out(out_dir, "kernel.csv");
            ks.write_csv(g, basis);
        }
    }
    return report.pass() ? 0 : 1;
}

int run_maximal(const BasisOpts& bo, const std::string& kernel_spec, const std::string& input,
                const std::string& out_dir) {
    auto [space, basis] = build_basis(bo);
    std::ifstream in(input);
    if (!in) throw std::invalid_argument("cannot read " + input);
    ScalarField f = read_field_csv(in, space);

    MaximalResult result = [&] {
        if (kernel_spec == "standard") return standard_maximal(f, basis);
        KernelStructure ks = build_kernels(basis, kernel_spec);
        if (kernel_spec.rfind("conv:", 0) == 0)
            return convolution_maximal(f, basis, ks, basis.mode());
        if (kernel_spec.rfind("fejer:", 0) == 0) return fejer_maximal(f, basis, ks);
        if (kernel_spec.rfind("weighted:", 0) == 0) return dyadic_weighted_maximal(f, basis, ks);
        KBCouple couple{&basis, &ks};
        return kb_maximal(f, couple);
    }();

    std::ostringstream csv;
    csv::write_row(csv, std::vector<std::string>{"index", "value", "argmax_ball"});
    for (std::size_t i = 0; i < result.values.size(); ++i)
        csv::write_row(csv, std::vector<std::string>{
                                std::to_string(i), csv::fmt(result.values.values()[i]),
                                std::to_string(result.argmax[i])});
    if (out_dir.empty()) {
        std::cout << csv.str();
    } else {
        auto f2 = open_out(out_dir, "maximal.csv");
        f2 << csv.str();
    }
    return 0;
}

int run_norms(const BasisOpts& bo, const std::string& input, double alpha,
              const std::string& out_dir) {
    auto [space, basis] = build_basis(bo);
    std::ifstream in(input);
    if (!in) throw std::invalid_argument("cannot read " + input);
    ScalarField f = read_field_csv(in, space);

    std::ostringstream csv;
    csv::write_row(csv, std::vector<std::string>{"norm", "value", "witness_ball", "alpha"});
    auto emit = [&](const std::string& name, NormKind kind, bool with_alpha) {
        NormReport r = norm(f, basis, kind, alpha);
        csv::write_row(csv, std::vector<std::string>{name, csv::fmt(r.value),
                                                     std::to_string(r.witness),
                                                     with_alpha ? csv::fmt(alpha) : "-"});
    };
    emit("bmo", NormKind::bmo, false);
    emit("blo", NormKind::blo, false);
    emit("bmo_alpha", NormKind::bmo_alpha, true);
    emit("blo_alpha", NormKind::blo_alpha, true);
    std::cout << csv.str();
    if (!out_dir.empty()) {
        auto f2 = open_out(out_dir, "norms.csv");
        f2 << csv.str();
    }
    return 0;
}

int run_experiment(const std::string& name, const BasisOpts& bo, const std::string& kernel_spec,
                   double alpha, double epsilon, std::uint64_t seed, const std::string& out_dir) {
    auto [space, basis] = build_basis(bo);
    std::vector<CorpusField> corpus = corpus_standard(basis, seed);

    Report rep;
    if (name == "t2-ratio" || name == "bmo-blo" || name == "lemmas") {
        KernelStructure ks = build_kernels(basis, kernel_spec);
        KBCouple couple{&basis, &ks};
        if (name == "t2-ratio") rep = exp_t2_ratio(couple, corpus, alpha);
        else if (name == "bmo-blo") rep = exp_bmo_blo(couple, corpus);
        else rep = exp_lemma_inequalities(couple, corpus, seed);
    } else if (name == "prop-p") {
        rep = exp_prop_p_decay(basis, corpus, alpha, epsilon);
    } else if (name == "norm-equiv") {
        rep = exp_norm_equivalence(basis, corpus, alpha);
    } else if (name == "weak-l1") {
        rep = exp_weak_l1(basis, corpus);
    } else {
        throw std::invalid_argument("unknown experiment: " + name);
    }
    rep.config.emplace_back("seed", std::to_string(seed));

    std::ostringstream summary;
    rep.write_summary_rows(summary);
    std::cout << summary.str();

    std::string dir = out_dir.empty() ? "." : out_dir;
    {
        auto f = open_out(dir, rep.name + ".csv");
        rep.write_csv(f);
    }
    {
        auto f = open_out(dir, "summary.csv");
        csv::write_row(f, std::vector<std::string>{"experiment", "key", "value", "witness"});
        f << summary.str();
    }
    return rep.invariants_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ball-basis calculus: maximal operators, oscillations, BMO/BLO norms"};
    app.require_subcommand(1);

    BasisOpts bo;
    std::string kernel_spec = "indicator";
    std::string input, out_dir, experiment_name;
    double alpha = 0.75, epsilon = 0.5;
    std::uint64_t seed = 1;
    bool dump = false;

    auto add_common = [&](CLI::App* cmd) {
        attach_basis_opts(cmd, bo);
        cmd->add_option("--out", out_dir, "output directory for CSV reports");
        // handled before parsing (see expand_config); registered for --help
        cmd->add_option("--config", "flat `key = value` config file; explicit flags override");
        return cmd;
    };

    CLI::App* vb = add_common(app.add_subcommand("validate-basis", "run the axiom suite"));
    vb->add_flag("--dump-basis", dump, "also export the ball family as CSV");

    CLI::App* vk = add_common(app.add_subcommand("validate-kernel", "run the kernel axiom suite"));
    vk->add_option("--kernel", kernel_spec, "kernel spec");
    vk->add_flag("--dump-kernel", dump, "also export kernel weights as CSV");

    CLI::App* mx = add_common(app.add_subcommand("maximal", "evaluate a maximal operator"));
    mx->add_option("--kernel", kernel_spec, "kernel spec or 'standard'");
    mx->add_option("--input", input, "field CSV (index,weight,value[,coord...])")->required();

    CLI::App* nm = add_common(app.add_subcommand("norms", "all four norms of a field"));
    nm->add_option("--input", input, "field CSV")->required();
    nm->add_option("--alpha", alpha, "alpha for the oscillation norms");

    CLI::App* ex = add_common(app.add_subcommand("experiment", "run a verification experiment"));
    ex->add_option("name", experiment_name,
                   "t2-ratio | bmo-blo | prop-p | norm-equiv | lemmas | weak-l1")
        ->required();
    ex->add_option("--kernel", kernel_spec, "kernel spec (couple experiments)");
    ex->add_option("--alpha", alpha, "oscillation parameter");
    ex->add_option("--epsilon", epsilon, "decay target for prop-p");
    ex->add_option("--seed", seed, "corpus/sampling seed");

    // later occurrences win, so explicit flags override config-file values
    for (CLI::App* cmd : {vb, vk, mx, nm, ex})
        for (CLI::Option* opt : cmd->get_options())
            opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        args.erase(args.begin());  // drop the program name
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        // --help lands here with exit code 0
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (vb->parsed()) return run_validate_basis(bo, out_dir, dump);
        if (vk->parsed()) return run_validate_kernel(bo, kernel_spec, out_dir, dump);
        if (mx->parsed()) return run_maximal(bo, kernel_spec, input, out_dir);
        if (nm->parsed()) return run_norms(bo, input, alpha, out_dir);
        if (ex->parsed())
            return run_experiment(experiment_name, bo, kernel_spec, alpha, epsilon, seed, out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
