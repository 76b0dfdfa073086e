#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "itra/classifier.hpp"
#include "itra/config_json.hpp"
#include "itra/decomposition.hpp"
#include "itra/features.hpp"
#include "itra/harness.hpp"
#include "itra/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace itra;

namespace {

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw invalid_input("config is not valid JSON (" + path + "): " + e.what());
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw invalid_input("config root must be a JSON object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw invalid_input("unknown config key: " + item.key());
}

std::string require_string(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw invalid_input("config requires string key '" + key + "'");
    return j.at(key).get<std::string>();
}

json section(const json& j, const std::string& key) {
    return j.contains(key) ? j.at(key) : json::object();
}

std::vector<int> int_list(const json& cfg, const std::string& inline_key,
                          const std::string& file_key) {
    json arr;
    if (cfg.contains(inline_key)) {
        arr = cfg.at(inline_key);
    } else if (cfg.contains(file_key)) {
        arr = load_config(cfg.at(file_key).get<std::string>());
    } else {
        throw invalid_input("config requires '" + inline_key + "' or '" + file_key + "'");
    }
    if (!arr.is_array()) throw invalid_input("'" + inline_key + "' must be a JSON array");
    std::vector<int> out;
    for (const auto& v : arr) {
        if (!v.is_number_integer()) throw invalid_input("labels must be integers");
        out.push_back(v.get<int>());
    }
    return out;
}

// Pools the PHOG frame columns of class `cls`, optionally skipping one video.
Matrix class_frame_matrix(const harness::Dataset& ds, const std::vector<Matrix>& phogs,
                          int cls, int skip_video) {
    Index cols = 0;
    for (std::size_t v = 0; v < ds.videos.size(); ++v)
        if (ds.videos[v].split == harness::Split::train && ds.videos[v].class_id == cls &&
            static_cast<int>(v) != skip_video)
            cols += phogs[v].cols();
    Matrix out;
    Index at = 0;
    for (std::size_t v = 0; v < ds.videos.size(); ++v) {
        if (ds.videos[v].split != harness::Split::train || ds.videos[v].class_id != cls ||
            static_cast<int>(v) == skip_video)
            continue;
        if (out.size() == 0) out.resize(phogs[v].rows(), cols);
        out.middleCols(at, phogs[v].cols()) = phogs[v];
        at += phogs[v].cols();
    }
    if (out.size() == 0) out.resize(0, 0);
    return out;
}

int cmd_synth(const json& cfg, std::uint64_t seed) {
    check_keys(cfg, {"synth", "out_dir"});
    const harness::SynthConfig sc = config::synth_from_json(section(cfg, "synth"));
    const fs::path out_dir = require_string(cfg, "out_dir");

    harness::Dataset ds = harness::synth_gen(sc, seed);
    harness::save_dataset(out_dir, ds);

    std::size_t train = 0;
    for (const auto& lv : ds.videos)
        if (lv.split == harness::Split::train) ++train;
    json out{{"classes", ds.classes},
             {"videos", ds.videos.size()},
             {"train", train},
             {"test", ds.videos.size() - train},
             {"out_dir", out_dir.string()}};
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_ingest_check(const json& cfg, std::uint64_t) {
    check_keys(cfg, {"root"});
    harness::Dataset ds = harness::ingest(require_string(cfg, "root"));

    std::size_t train = 0;
    for (const auto& lv : ds.videos)
        if (lv.split == harness::Split::train) ++train;
    const auto& first = ds.videos.front().video.frames.front();
    json out{{"classes", ds.classes},
             {"videos", ds.videos.size()},
             {"train", train},
             {"test", ds.videos.size() - train},
             {"frame_height", first.rows()},
             {"frame_width", first.cols()}};
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_decompose(const json& cfg, std::uint64_t seed) {
    check_keys(cfg, {"video", "class_frames", "reference_class", "decompose", "out"});
    const decomposition::VideoTensor video =
        harness::load_video_file(require_string(cfg, "video"));
    Matrix class_frames;
    if (cfg.contains("class_frames"))
        class_frames = io::load_matrix(cfg.at("class_frames").get<std::string>());
    const int ref = cfg.value("reference_class", -1);
    const auto dcfg = config::decompose_from_json(section(cfg, "decompose"));

    decomposition::KeySequenceSet ks =
        decomposition::decompose(video, class_frames, dcfg, ref, seed);

    json centers = json::array();
    json cuboids = json::array();
    for (const auto& s : ks.sequences) {
        centers.push_back(s.key_frame_index);
        cuboids.push_back(s.cuboid_descriptors.cols());
    }
    if (cfg.contains("out")) {
        io::StoredKeySequences stored;
        stored.t = static_cast<std::uint32_t>(dcfg.selection.t);
        for (const auto& s : ks.sequences) {
            stored.centers.push_back(static_cast<std::uint32_t>(s.key_frame_index));
            stored.blocks.push_back(s.cuboid_descriptors);
        }
        io::save_keysequences(cfg.at("out").get<std::string>(), stored);
    }
    json out{{"key_frames", centers},
             {"cuboids_per_sequence", cuboids},
             {"descriptor_dim", dcfg.hog3d.dim()},
             {"window", 2 * dcfg.selection.t + 1}};
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_train_bank(const json& cfg, std::uint64_t seed) {
    check_keys(cfg, {"root", "decompose", "bank", "out_dir"});
    harness::Dataset ds = harness::ingest(require_string(cfg, "root"));
    const auto dcfg = config::decompose_from_json(section(cfg, "decompose"));
    const auto bcfg = config::bank_from_json(section(cfg, "bank"));
    const fs::path out_dir = require_string(cfg, "out_dir");

    std::vector<Matrix> phogs(ds.videos.size());
    for (std::size_t v = 0; v < ds.videos.size(); ++v)
        if (ds.videos[v].split == harness::Split::train)
            phogs[v] = decomposition::phog_matrix(ds.videos[v].video, dcfg.phog);

    const Index k = dcfg.selection.k;
    std::vector<std::vector<Matrix>> train_sets(
        ds.classes.size(), std::vector<Matrix>(static_cast<std::size_t>(k)));
    for (std::size_t v = 0; v < ds.videos.size(); ++v) {
        const auto& lv = ds.videos[v];
        if (lv.split != harness::Split::train) continue;
        const Matrix rest =
            class_frame_matrix(ds, phogs, lv.class_id, static_cast<int>(v));
        decomposition::KeySequenceSet ks = decomposition::decompose(
            lv.video, rest, dcfg, lv.class_id, split_seed(seed, "video", v));
        auto& cells = train_sets[static_cast<std::size_t>(lv.class_id)];
        for (Index pos = 0; pos < k; ++pos) {
            const Matrix& block = ks.sequences[static_cast<std::size_t>(pos)].cuboid_descriptors;
            Matrix& cell = cells[static_cast<std::size_t>(pos)];
            if (cell.size() == 0) {
                cell = block;
            } else {
                Matrix grown(cell.rows(), cell.cols() + block.cols());
                grown << cell, block;
                cell = std::move(grown);
            }
        }
    }

    features::DictionaryBank bank = features::learn_dictionary_bank(train_sets, bcfg, seed);
    features::save_bank(out_dir, bank);
    fs::create_directories(out_dir / "class_frames");
    for (std::size_t c = 0; c < ds.classes.size(); ++c)
        io::save_matrix(out_dir / "class_frames" / ("c" + std::to_string(c) + ".matx"),
                        class_frame_matrix(ds, phogs, static_cast<int>(c), -1));

    json out{{"classes", bank.c},
             {"positions", bank.k},
             {"atoms", bank.n_a},
             {"descriptor_dim", bank.delta},
             {"out_dir", out_dir.string()}};
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_describe(const json& cfg, std::uint64_t) {
    check_keys(cfg, {"keyseq", "bank", "reference_class", "itra", "out"});
    const io::StoredKeySequences stored =
        io::load_keysequences(require_string(cfg, "keyseq"));
    const features::DictionaryBank bank = features::load_bank(require_string(cfg, "bank"));
    const int ref = cfg.value("reference_class", 0);
    const auto icfg = config::itra_from_json(section(cfg, "itra"));

    decomposition::KeySequenceSet ks;
    for (std::size_t j = 0; j < stored.blocks.size(); ++j) {
        decomposition::KeySequence s;
        s.key_frame_index = static_cast<Index>(stored.centers[j]);
        s.cuboid_descriptors = stored.blocks[j];
        ks.sequences.push_back(std::move(s));
    }
    features::ItraDescriptor d = features::itra(ks, bank, ref, icfg);
    if (cfg.contains("out"))
        io::save_matrix(cfg.at("out").get<std::string>(), Matrix(d.flat));

    json out{{"length", d.flat.size()}, {"reference_class", d.reference_class}};
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_train_classifier(const json& cfg, std::uint64_t seed) {
    check_keys(cfg, {"descriptors", "classifier", "out_dir"});
    if (!cfg.contains("descriptors") || !cfg.at("descriptors").is_array())
        throw invalid_input("config requires 'descriptors', one entry per class");
    const fs::path out_dir = require_string(cfg, "out_dir");

    std::vector<Matrix> by_class;
    for (const auto& entry : cfg.at("descriptors")) {
        if (entry.is_string()) {
            by_class.push_back(io::load_matrix(entry.get<std::string>()));
        } else if (entry.is_array()) {
            Matrix m;
            Index at = 0;
            for (const auto& p : entry) {
                Matrix v = io::load_matrix(p.get<std::string>());
                if (m.size() == 0) m.resize(v.rows(), static_cast<Index>(entry.size()));
                if (v.cols() != 1 || v.rows() != m.rows())
                    throw invalid_input("descriptor files in a class list must be "
                                        "single equal-length columns");
                m.col(at++) = v.col(0);
            }
            by_class.push_back(std::move(m));
        } else {
            throw invalid_input("each 'descriptors' entry must be a matrix path or a "
                                "list of vector paths");
        }
    }

    const json ccfg = section(cfg, "classifier");
    check_keys(ccfg, {"mu", "sparsity_fraction", "ksvd_iters"});
    classifier::ClassifierModel model = classifier::train_classifier(
        by_class, ccfg.value("mu", 2), ccfg.value("sparsity_fraction", 0.10),
        ccfg.value("ksvd_iters", 10), seed);
    classifier::save_classifier(out_dir, model);

    json out{{"classes", model.n_classes()},
             {"atoms_per_class", model.atoms_per_class},
             {"lambda", model.lambda5},
             {"descriptor_dim", model.itra_dim},
             {"out_dir", out_dir.string()}};
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_classify(const json& cfg, std::uint64_t seed) {
    check_keys(cfg, {"video", "bank", "model", "class_frames", "class_frames_dir",
                     "decompose", "itra", "out"});
    const decomposition::VideoTensor video =
        harness::load_video_file(require_string(cfg, "video"));
    const features::DictionaryBank bank = features::load_bank(require_string(cfg, "bank"));
    const classifier::ClassifierModel model =
        classifier::load_classifier(require_string(cfg, "model"));

    std::vector<Matrix> per_class_frames;
    if (cfg.contains("class_frames_dir")) {
        const fs::path dir = cfg.at("class_frames_dir").get<std::string>();
        for (Index c = 0; c < bank.c; ++c)
            per_class_frames.push_back(
                io::load_matrix(dir / ("c" + std::to_string(c) + ".matx")));
    } else if (cfg.contains("class_frames")) {
        for (const auto& p : cfg.at("class_frames"))
            per_class_frames.push_back(io::load_matrix(p.get<std::string>()));
    } else {
        throw invalid_input("config requires 'class_frames' or 'class_frames_dir'");
    }
    if (static_cast<Index>(per_class_frames.size()) != bank.c)
        throw invalid_input("need one class-frame matrix per bank class");

    classifier::ClassifyConfig ccfg;
    ccfg.decompose = config::decompose_from_json(section(cfg, "decompose"));
    ccfg.itra = config::itra_from_json(section(cfg, "itra"));
    classifier::ClassificationResult res =
        classifier::classify(video, per_class_frames, bank, model, ccfg, seed);

    json mass = json::array();
    for (Index v = 0; v < res.per_class_mass.rows(); ++v) {
        json row = json::array();
        for (Index c = 0; c < res.per_class_mass.cols(); ++c)
            row.push_back(res.per_class_mass(v, c));
        mass.push_back(row);
    }
    json out{{"label", res.label}, {"votes", res.partial_votes}, {"mass", mass}};
    if (cfg.contains("out")) {
        std::ofstream f(cfg.at("out").get<std::string>());
        if (!f) throw io_error("cannot write " + cfg.at("out").get<std::string>());
        f << out.dump(2) << '\n';
    }
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_evaluate(const json& cfg, std::uint64_t seed) {
    check_keys(cfg, {"predictions", "predictions_file", "truth", "truth_file", "classes",
                     "out_dir"});
    const std::vector<int> pred = int_list(cfg, "predictions", "predictions_file");
    const std::vector<int> truth = int_list(cfg, "truth", "truth_file");
    const fs::path out_dir = require_string(cfg, "out_dir");

    std::vector<std::string> names;
    if (cfg.contains("classes")) {
        names = cfg.at("classes").get<std::vector<std::string>>();
    } else {
        int top = -1;
        for (int v : pred) top = std::max(top, v);
        for (int v : truth) top = std::max(top, v);
        for (int c = 0; c <= top; ++c) names.push_back("class" + std::to_string(c));
    }

    harness::EvalReport report =
        harness::evaluate(pred, truth, static_cast<int>(names.size()));
    report.seed = seed;
    report.config_hash = config::hash(cfg);
    fs::create_directories(out_dir);
    harness::write_report_json(out_dir / "report.json", report, names);
    harness::write_confusion_csv(out_dir / "confusion.csv", report, names);

    json out{{"accuracy", report.accuracy}, {"out_dir", out_dir.string()}};
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_ablate(const json& cfg, std::uint64_t seed) {
    check_keys(cfg, {"root", "synth", "experiment", "grid", "seeds", "out_dir"});
    const fs::path out_dir = require_string(cfg, "out_dir");
    const bool grid = cfg.value("grid", false);

    harness::Dataset ds;
    if (cfg.contains("root")) {
        ds = harness::ingest(cfg.at("root").get<std::string>());
    } else if (cfg.contains("synth")) {
        ds = harness::synth_gen(config::synth_from_json(cfg.at("synth")), seed);
    } else {
        throw invalid_input("config requires 'root' or 'synth'");
    }

    std::vector<std::uint64_t> seeds;
    if (cfg.contains("seeds"))
        seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
    else
        seeds.push_back(seed);
    if (seeds.empty()) throw invalid_input("'seeds' must not be empty");

    const harness::ExperimentConfig base =
        config::experiment_from_json(section(cfg, "experiment"));
    std::vector<std::pair<harness::FrameMethod, harness::DescriptorMethod>> combos;
    if (grid) {
        for (auto f : {harness::FrameMethod::proposed, harness::FrameMethod::uniform,
                       harness::FrameMethod::window_clusters})
            for (auto d :
                 {harness::DescriptorMethod::full, harness::DescriptorMethod::shared_dictionary,
                  harness::DescriptorMethod::inter_only})
                combos.emplace_back(f, d);
    } else {
        combos.emplace_back(base.frame_method, base.descriptor_method);
    }

    json summary_runs = json::array();
    json summary_combos = json::array();
    for (const auto& [fm, dm] : combos) {
        harness::ExperimentConfig ecfg = base;
        ecfg.frame_method = fm;
        ecfg.descriptor_method = dm;
        const std::string combo =
            harness::frame_method_name(fm) + "_" + harness::descriptor_method_name(dm);

        json accs = json::array();
        double total = 0.0;
        for (std::uint64_t s : seeds) {
            harness::EvalReport rep = harness::run_experiment(ds, ecfg, s);
            fs::path dir = grid ? out_dir / combo : out_dir;
            if (seeds.size() > 1) dir /= "seed" + std::to_string(s);
            fs::create_directories(dir);
            harness::write_report_json(dir / "report.json", rep, ds.classes);
            harness::write_confusion_csv(dir / "confusion.csv", rep, ds.classes);
            accs.push_back(rep.accuracy);
            total += rep.accuracy;
            summary_runs.push_back({{"frame_method", harness::frame_method_name(fm)},
                                    {"descriptor_method", harness::descriptor_method_name(dm)},
                                    {"seed", s},
                                    {"accuracy", rep.accuracy}});
        }
        summary_combos.push_back({{"frame_method", harness::frame_method_name(fm)},
                                  {"descriptor_method", harness::descriptor_method_name(dm)},
                                  {"accuracies", accs},
                                  {"mean_accuracy", total / static_cast<double>(seeds.size())}});
    }

    fs::create_directories(out_dir);
    json summary{{"combos", summary_combos}, {"runs", summary_runs}};
    std::ofstream f(out_dir / "summary.json");
    if (!f) throw io_error("cannot write " + (out_dir / "summary.json").string());
    f << summary.dump(2) << '\n';

    json out{{"combos", summary_combos}, {"out_dir", out_dir.string()}};
    std::cout << out.dump() << '\n';
    return 0;
}

int fail(const std::string& type, const std::string& message) {
    std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Key-sequence decomposition, relative descriptors, and "
                 "sparse-reconstruction classification for short videos"};
    app.require_subcommand(1);

    struct Sub {
        std::string name;
        std::string help;
        int (*run)(const json&, std::uint64_t);
    };
    const std::vector<Sub> subs = {
        {"synth", "Generate a synthetic labeled video dataset", cmd_synth},
        {"ingest-check", "Validate a dataset directory and report its layout",
         cmd_ingest_check},
        {"decompose", "Decompose one video into key-sequences", cmd_decompose},
        {"train-bank", "Learn the per-class per-position dictionary bank", cmd_train_bank},
        {"describe", "Build the relative descriptor for stored key-sequences",
         cmd_describe},
        {"train-classifier", "Train the block classifier on per-class descriptors",
         cmd_train_classifier},
        {"classify", "Classify one video with a trained bank and classifier",
         cmd_classify},
        {"evaluate", "Score predictions and write report.json / confusion.csv",
         cmd_evaluate},
        {"ablate", "Run a seeded experiment or the full method/descriptor grid",
         cmd_ablate},
    };

    std::string config_path;
    std::uint64_t seed = 0;
    const Sub* chosen = nullptr;
    for (const auto& sub : subs) {
        CLI::App* s = app.add_subcommand(sub.name, sub.help);
        s->add_option("--config", config_path, "JSON config file")->required();
        s->add_option("--seed", seed, "master random seed");
        s->callback([&chosen, &sub] { chosen = &sub; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump()
                  << '\n';
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    try {
        return chosen->run(load_config(config_path), seed);
    } catch (const invalid_input& e) {
        return fail("invalid_input", e.what());
    } catch (const invalid_dictionary& e) {
        return fail("invalid_dictionary", e.what());
    } catch (const empty_result& e) {
        return fail("empty_result", e.what());
    } catch (const io_error& e) {
        return fail("io_error", e.what());
    } catch (const json::exception& e) {
        return fail("config", e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
}
