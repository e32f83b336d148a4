// srce: dataset generation, training, evaluation and experiment sweeps.
//
//   srce [global options] generate|train|evaluate|sweep|report ...
//
// Outputs go under --output-dir, else $SRCE_OUTPUT_DIR, else ./srce-out.
// Exit codes: 0 all cells completed, 1 runtime failure, 2 bad configuration,
// 3 report incomplete.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "srce/srce.hpp"

namespace fs = std::filesystem;
using namespace srce;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kConfig = 2, kIncomplete = 3 };

struct Overrides {
    std::string config_path;
    std::string output_dir;
    bool full_scale = false;
    bool db = false;
    bool quiet = false;
    std::optional<std::size_t> pilots, epochs, batch_frames, decay_every, train_frames, val_frames, test_frames;
    std::optional<std::string> modulation, interpolation, arch;
    std::optional<double> train_snr, lr, velocity;
    std::vector<double> test_snr;
    std::optional<std::uint64_t> channel_seed, noise_seed, init_seed, shuffle_seed;
    bool two_channel = false;
};

ExperimentConfig load_config(const Overrides& o) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        try {
            json::parse(io::read_text(o.config_path)).get_to(cfg);
        } catch (const json::exception& e) {
            throw ConfigError(o.config_path + ": " + e.what());
        }
    }
    if (o.full_scale) cfg.schedule = TrainSchedule::full_scale();
    if (o.pilots) cfg.pilots = *o.pilots;
    if (o.modulation) cfg.modulation = ofdm::parse_modulation(*o.modulation);
    if (o.interpolation) cfg.interpolation = parse_interpolation(*o.interpolation);
    if (o.arch) cfg.architecture = models::ArchitectureSpec::parse(*o.arch);
    if (o.two_channel) cfg.architecture.io_channels = 2;
    if (o.train_snr) cfg.train_snr_db = *o.train_snr;
    if (!o.test_snr.empty()) cfg.test_snr_grid = o.test_snr;
    if (o.velocity) cfg.channel.mobile_velocity = *o.velocity;
    if (o.epochs) cfg.schedule.epochs = *o.epochs;
    if (o.batch_frames) cfg.schedule.batch_frames = *o.batch_frames;
    if (o.decay_every) cfg.schedule.decay_every = *o.decay_every;
    if (o.lr) cfg.schedule.initial_lr = *o.lr;
    if (o.train_frames) cfg.sizes.train_frames = *o.train_frames;
    if (o.val_frames) cfg.sizes.val_frames = *o.val_frames;
    if (o.test_frames) cfg.sizes.test_frames = *o.test_frames;
    if (o.channel_seed) cfg.seeds.channel = *o.channel_seed;
    if (o.noise_seed) cfg.seeds.noise = *o.noise_seed;
    if (o.init_seed) cfg.seeds.init = *o.init_seed;
    if (o.shuffle_seed) cfg.seeds.shuffle = *o.shuffle_seed;
    cfg.validate();
    return cfg;
}

fs::path output_dir(const Overrides& o) {
    if (!o.output_dir.empty()) return o.output_dir;
    if (const char* env = std::getenv("SRCE_OUTPUT_DIR"); env && *env) return env;
    return "srce-out";
}

std::string snr_tag(double db) { return harness::format_double(db) + "dB"; }

std::string dataset_name(const ExperimentConfig& cfg, data::Split split, double snr) {
    return data::to_string(split) + "-" + snr_tag(snr) + "-p" + std::to_string(cfg.pilots) + "-" +
           ofdm::to_string(cfg.modulation) + ".bin";
}

int finish_report(harness::MseReport& rep, const fs::path& path, bool db, bool quiet) {
    harness::emit_report(rep, path, db);
    if (!quiet) std::cout << harness::pivot_table(rep, true);
    std::cout << "report: " << path.string() << "\n";
    const bool complete = rep.metadata.value("complete", true);
    if (!complete) std::cerr << "report incomplete: " << rep.rows.size() << " cells\n";
    return complete ? kOk : kIncomplete;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM channel estimation with super-resolution networks"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("-c,--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("-o,--output-dir", o.output_dir, "output directory (default $SRCE_OUTPUT_DIR or ./srce-out)");
    app.add_flag("--full-scale", o.full_scale, "800 epochs, lr decay every 200");
    app.add_flag("--db", o.db, "add a 10*log10(mse) column to reports");
    app.add_flag("-q,--quiet", o.quiet, "no progress output");
    app.add_option("--pilots", o.pilots, "pilots per OFDM symbol");
    app.add_option("--modulation", o.modulation, "qpsk or 16qam");
    app.add_option("--interpolation", o.interpolation, "spline or linear");
    app.add_option("--arch", o.arch, "fsrcnn-x, fsrce-x or srcnn");
    app.add_flag("--two-channel", o.two_channel, "feed real/imag planes as one 2-channel image");
    app.add_option("--train-snr", o.train_snr, "training SNR in dB");
    app.add_option("--test-snr", o.test_snr, "test SNR grid in dB")->delimiter(',');
    app.add_option("--velocity", o.velocity, "mobile velocity in m/s");
    app.add_option("--epochs", o.epochs);
    app.add_option("--batch-frames", o.batch_frames);
    app.add_option("--decay-every", o.decay_every);
    app.add_option("--lr", o.lr, "initial learning rate");
    app.add_option("--train-frames", o.train_frames);
    app.add_option("--val-frames", o.val_frames);
    app.add_option("--test-frames", o.test_frames);
    app.add_option("--channel-seed", o.channel_seed);
    app.add_option("--noise-seed", o.noise_seed);
    app.add_option("--init-seed", o.init_seed);
    app.add_option("--shuffle-seed", o.shuffle_seed);

    auto* gen = app.add_subcommand("generate", "write train/val/test datasets");
    std::string split = "all";
    std::optional<double> gen_snr;
    std::optional<std::size_t> gen_count;
    gen->add_option("--split", split, "train, val, test or all")->check(CLI::IsMember({"train", "val", "test", "all"}));
    gen->add_option("--snr", gen_snr, "SNR in dB (default: training SNR, test grid for test)");
    gen->add_option("--count", gen_count, "frames per file (default: configured size)");

    auto* tr = app.add_subcommand("train", "train (or load cached) model for the configuration");

    auto* ev = app.add_subcommand("evaluate", "MSE of LS/LMMSE/MMSE and checkpoints over the test grid");
    std::vector<std::string> checkpoints;
    std::vector<std::string> test_files;
    bool no_baselines = false;
    std::string ev_out;
    ev->add_option("--checkpoint", checkpoints, "checkpoint manifest(s)")->check(CLI::ExistingFile);
    ev->add_option("--test", test_files, "test dataset file(s); default: simulate the test grid")->check(CLI::ExistingFile);
    ev->add_flag("--no-baselines", no_baselines);
    ev->add_option("--out", ev_out, "report CSV path");

    auto* sw = app.add_subcommand("sweep", "experiment sweeps");
    sw->require_subcommand(1);
    std::string sw_out;
    sw->add_option("--out", sw_out, "report CSV path");
    auto* sw_snr = sw->add_subcommand("snr", "MSE vs SNR for one or more architectures");
    std::vector<std::string> sw_archs;
    sw_snr->add_option("--archs", sw_archs, "architectures (default: configured)")->delimiter(',');
    auto* sw_pilots = sw->add_subcommand("pilots", "one model per pilot count");
    std::vector<std::size_t> pilot_list{8, 16};
    sw_pilots->add_option("--values", pilot_list)->delimiter(',');
    auto* sw_layers = sw->add_subcommand("layers", "FSRCNN-x for each mapping depth x");
    std::vector<std::size_t> layer_list{2, 4, 6};
    sw_layers->add_option("--values", layer_list)->delimiter(',');
    auto* sw_mis = sw->add_subcommand("mismatch", "one model per training SNR, tested on the grid");
    std::vector<double> train_snr_list{5, 10, 15, 20, 25};
    sw_mis->add_option("--values", train_snr_list)->delimiter(',');

    auto* rp = app.add_subcommand("report", "print or merge report CSVs");
    std::vector<std::string> report_files;
    std::string merge_out;
    rp->add_option("files", report_files, "report CSV files")->required()->check(CLI::ExistingFile);
    rp->add_option("--merge", merge_out, "write the merged, sorted report here");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = load_config(o);
        const fs::path out = output_dir(o);
        const harness::Workspace ws(out);
        std::function<void(const std::string&)> log;
        if (!o.quiet) log = [](const std::string& s) { std::cerr << s << "\n"; };

        if (*gen) {
            fs::create_directories(ws.datasets());
            std::vector<data::Split> splits;
            if (split == "all") splits = {data::Split::Train, data::Split::Val, data::Split::Test};
            else splits = {data::parse_split(split)};
            for (auto s : splits) {
                std::vector<double> snrs = s == data::Split::Test ? cfg.test_snr_grid : std::vector<double>{cfg.train_snr_db};
                if (gen_snr) snrs = {*gen_snr};
                const std::size_t count = gen_count ? *gen_count
                                          : s == data::Split::Train ? cfg.sizes.train_frames
                                          : s == data::Split::Val   ? cfg.sizes.val_frames
                                                                    : cfg.sizes.test_frames;
                for (double snr : snrs) {
                    const auto f = data::generate_dataset(cfg, s, count, Snr::db(snr));
                    const fs::path p = ws.datasets() / dataset_name(cfg, s, snr);
                    data::write_dataset(p.string(), f, {{"config", cfg}});
                    std::cout << p.string() << " (" << count << " frames)\n";
                }
            }
            return kOk;
        }

        if (*tr) {
            const auto t = ws.train_cached(cfg, {}, log);
            std::cout << "final: " << t.final_manifest.string() << "\nbest:  " << t.best_manifest.string() << "\n";
            const auto& hist = t.metadata.at("history");
            if (!hist.empty())
                std::cout << "last epoch: " << hist.back().dump() << "\nbest epoch: " << t.metadata.at("best_epoch")
                          << "\n";
            return kOk;
        }

        if (*ev) {
            std::vector<harness::NamedModel> nets;
            for (const auto& c : checkpoints) {
                auto ck = nn::load_checkpoint(c);
                auto spec = ck.metadata.at("architecture").get<models::ArchitectureSpec>();
                if (ck.metadata.value("N", cfg.n()) != cfg.n() || ck.metadata.value("M", cfg.m()) != cfg.m())
                    throw ConfigError(c + ": checkpoint dimensions differ from the configuration");
                std::string name = spec.estimator_name();
                if (checkpoints.size() > 1) name += "[" + fs::path(c).parent_path().filename().string() + "]";
                nets.push_back({name, std::move(ck.model), harness::normalization_from(ck.metadata)});
            }
            harness::MseReport rep;
            rep.metadata = {{"command", "evaluate"}, {"config", cfg}, {"seeds", cfg.seeds}, {"checkpoints", checkpoints}};
            std::optional<harness::Baselines> base;
            if (!no_baselines) base = harness::Baselines::make(cfg);
            std::size_t sets = 0;
            const auto run = [&](const data::DatasetFile& test) {
                if (test.header.n != cfg.n() || test.header.m != cfg.m())
                    throw ConfigError("test set dimensions differ from the configuration");
                for (auto& r : harness::evaluate(test, base ? &*base : nullptr, nets)) rep.rows.push_back(std::move(r));
                ++sets;
            };
            if (!test_files.empty()) {
                for (const auto& f : test_files) run(data::read_dataset(f));
            } else {
                for (double s : cfg.test_snr_grid)
                    run(data::generate_dataset(cfg, data::Split::Test, cfg.sizes.test_frames, Snr::db(s)));
            }
            const std::size_t expected = sets * (nets.size() + (base ? 3 : 0));
            rep.metadata["expected_cells"] = expected;
            rep.metadata["complete"] = harness::report_complete(rep, expected);
            return finish_report(rep, ev_out.empty() ? ws.reports() / "evaluate.csv" : fs::path(ev_out), o.db, o.quiet);
        }

        if (*sw) {
            harness::SweepContext ctx{&ws, {}, log};
            harness::MseReport rep;
            std::string name;
            try {
                if (*sw_snr) {
                    name = "sweep-snr";
                    std::vector<models::ArchitectureSpec> archs;
                    for (const auto& a : sw_archs) archs.push_back(models::ArchitectureSpec::parse(a));
                    if (archs.empty()) archs.push_back(cfg.architecture);
                    harness::sweep_snr(cfg, archs, rep, ctx);
                } else if (*sw_pilots) {
                    name = "sweep-pilots";
                    harness::sweep_pilots(cfg, pilot_list, rep, ctx);
                } else if (*sw_layers) {
                    name = "sweep-layers";
                    harness::sweep_layers(cfg, layer_list, rep, ctx);
                } else {
                    name = "sweep-mismatch";
                    harness::sweep_mismatch(cfg, train_snr_list, rep, ctx);
                }
            } catch (...) {
                // flush what was computed before propagating
                rep.metadata["complete"] = false;
                harness::emit_report(rep, sw_out.empty() ? ws.reports() / (name + ".partial.csv") : fs::path(sw_out), o.db);
                throw;
            }
            return finish_report(rep, sw_out.empty() ? ws.reports() / (name + ".csv") : fs::path(sw_out), o.db, o.quiet);
        }

        if (*rp) {
            harness::MseReport merged;
            bool complete = true;
            for (const auto& f : report_files) {
                auto r = harness::read_report(f);
                complete = complete && r.metadata.value("complete", true);
                merged.rows.insert(merged.rows.end(), r.rows.begin(), r.rows.end());
                merged.metadata["sources"].push_back(f);
            }
            merged.metadata["complete"] = complete;
            std::cout << harness::pivot_table(merged, o.db);
            if (!merge_out.empty()) harness::emit_report(merged, merge_out, o.db);
            return complete ? kOk : kIncomplete;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
