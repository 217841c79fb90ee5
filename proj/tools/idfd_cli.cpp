// Command-line front end: gen, train, sweep, analyze, eval.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "idfd/clustering.hpp"
#include "idfd/dataset.hpp"
#include "idfd/errors.hpp"
#include "idfd/experiment.hpp"
#include "idfd/format.hpp"
#include "idfd/temperature.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

/// One string option per config key, so every RunConfig key is also a flag.
struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;
    std::vector<std::string> assignments;

    void attach(CLI::App* app, bool seed_required) {
        app->add_option("-c,--config", config_file, "key = value config file")->check(CLI::ExistingFile);
        app->add_option("--set", assignments, "extra key=value assignments, applied last");
        for (const auto& key : idfd::config_keys()) {
            auto* opt = app->add_option("--" + std::string(key.name), values[std::string(key.name)],
                                        std::string(key.help));
            if (key.name == "seed" && seed_required) opt->required();
        }
    }

    idfd::RunConfig resolve(const CLI::App* app) const {
        idfd::RunConfig cfg;
        if (!config_file.empty()) cfg = idfd::load_run_config(config_file);
        for (const auto& key : idfd::config_keys()) {
            const std::string name(key.name);
            if (app->count("--" + name) > 0) idfd::set_config_value(cfg, name, values.at(name));
        }
        for (const auto& a : assignments) {
            const auto eq = a.find('=');
            if (eq == std::string::npos) throw idfd::ConfigError("--set expects key=value, got '" + a + "'");
            idfd::set_config_value(cfg, a.substr(0, eq), a.substr(eq + 1));
        }
        idfd::validate(cfg);
        return cfg;
    }
};

void print_scores(const idfd::RunReport& r) {
    std::cout << "mode=" << idfd::to_string(r.mode) << " seed=" << r.seed << " n=" << r.n << " k=" << r.k
              << " hash=" << r.config_hash;
    if (r.final_scores) {
        std::cout << " acc=" << idfd::format_double(r.final_scores->acc)
                  << " nmi=" << idfd::format_double(r.final_scores->nmi)
                  << " ari=" << idfd::format_double(r.final_scores->ari);
    }
    std::cout << " corr=" << idfd::format_double(r.mean_abs_correlation) << '\n';
}

std::vector<long long> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw idfd::Error("cannot open " + path);
    std::vector<long long> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        labels.push_back(idfd::parse_integer(line.substr(0, line.find_last_not_of(" \t\r") + 1)));
    }
    return labels;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustering-friendly representation learning toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "write a synthetic sphere-mixture dataset");
    idfd::SphereMixtureSpec spec;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    std::string gen_format = "csv-labeled";
    gen->add_option("--k", spec.k, "clusters");
    gen->add_option("--n", spec.n, "samples");
    gen->add_option("--dim", spec.dim, "dimension");
    gen->add_option("--separation", spec.separation, "minimum angle between cluster directions (radians)");
    gen->add_option("--noise", spec.noise, "isotropic noise sigma");
    gen->add_option("--seed", gen_seed, "generator seed")->required();
    gen->add_option("-o,--out", gen_out, "output file")->required();
    gen->add_option("--format", gen_format, "csv or csv-labeled");

    // train
    auto* train = app.add_subcommand("train", "train, evaluate and write reports");
    ConfigFlags train_flags;
    train_flags.attach(train, true);
    bool print_config = false;
    train->add_flag("--print-config", print_config, "print the resolved config and exit");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "one run per value of tau, tau2 or alpha");
    ConfigFlags sweep_flags;
    sweep_flags.attach(sweep, true);
    std::string sweep_param;
    std::vector<double> sweep_values;
    sweep->add_option("--param", sweep_param, "tau, tau2 or alpha")->required();
    sweep->add_option("--values", sweep_values, "values to try")->required()->delimiter(',');

    // analyze
    auto* analyze = app.add_subcommand("analyze", "temperature tables of the circle toy model");
    std::size_t an_n = 3600;
    std::size_t an_k = 10;
    std::vector<double> an_taus = {0.07, 0.2, 0.5, 1, 2, 5, 10};
    std::size_t an_grid = 0;
    std::string an_out;
    std::string an_profile_out;
    analyze->add_option("--n", an_n, "points on the circle");
    analyze->add_option("--k", an_k, "compact cluster count (must divide n)");
    analyze->add_option("--taus", an_taus, "temperatures")->delimiter(',');
    analyze->add_option("--out", an_out, "CSV path; stdout when empty");
    analyze->add_option("--profile-grid", an_grid, "also emit exp(cos/tau) profiles on this many angles");
    analyze->add_option("--profile-out", an_profile_out, "CSV path for profiles");

    // eval
    auto* eval = app.add_subcommand("eval", "cluster saved embeddings and score them");
    std::string ev_embeddings;
    std::string ev_labels;
    std::size_t ev_k = 0;
    std::uint64_t ev_seed = 0;
    std::size_t ev_restarts = 10;
    eval->add_option("--embeddings", ev_embeddings, "CSV matrix, one sample per line")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--labels", ev_labels, "one integer label per line")->required()->check(CLI::ExistingFile);
    eval->add_option("--k", ev_k, "clusters; 0 uses the label count");
    eval->add_option("--seed", ev_seed, "k-means seed");
    eval->add_option("--restarts", ev_restarts, "k-means restarts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigExit;
    }

    try {
        if (*gen) {
            idfd::SeededRng rng(gen_seed);
            const auto ds = idfd::gen_sphere_mixture(spec, rng);
            idfd::save_dataset(gen_out, ds, idfd::parse_dataset_format(gen_format));
            std::cout << "wrote " << ds.size() << " samples to " << gen_out << '\n';
        } else if (*train) {
            const auto cfg = train_flags.resolve(train);
            if (print_config) {
                std::cout << idfd::resolved_config(cfg) << "hash=" << idfd::config_hash(cfg) << '\n';
                return 0;
            }
            print_scores(idfd::run_experiment(cfg));
        } else if (*sweep) {
            const auto cfg = sweep_flags.resolve(sweep);
            const auto report = idfd::sweep(cfg, idfd::parse_sweep_parameter(sweep_param), sweep_values);
            idfd::write_sweep_csv(std::cout, report);
        } else if (*analyze) {
            const auto rows = idfd::temperature_table(an_n, an_k, an_taus);
            if (an_out.empty()) {
                idfd::write_temperature_csv(std::cout, rows);
            } else {
                std::ofstream out(an_out);
                idfd::write_temperature_csv(out, rows);
            }
            if (an_grid > 0) {
                std::vector<idfd::ConcentrationProfile> profiles;
                for (double t : an_taus) profiles.push_back(idfd::concentration_profile(t, an_grid));
                if (an_profile_out.empty()) {
                    idfd::write_profile_csv(std::cout, profiles);
                } else {
                    std::ofstream out(an_profile_out);
                    idfd::write_profile_csv(out, profiles);
                }
            }
        } else if (*eval) {
            std::ifstream in(ev_embeddings);
            const auto x = idfd::read_matrix_csv(in);
            const auto labels = read_labels(ev_labels);
            if (labels.size() != x.rows()) {
                throw idfd::DimensionMismatch("label count differs from embedding rows");
            }
            const auto truth = idfd::Partition::from_labels(labels);
            const std::size_t k = ev_k != 0 ? ev_k : truth.k();
            const auto res = idfd::kmeans(x, k, idfd::SeededRng(ev_seed), {ev_restarts, 300});
            const auto s = idfd::score(truth, res.partition);
            nlohmann::json j = {{"acc", s.acc}, {"nmi", s.nmi}, {"ari", s.ari},
                                {"k", k}, {"n", x.rows()}, {"seed", ev_seed}};
            std::cout << j.dump(2) << '\n';
        }
    } catch (const idfd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeExit;
    }
    return 0;
}
