#include "itra/config_json.hpp"

#include <set>
#include <string>

namespace itra::config {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const char* what) {
    if (!j.is_object()) throw invalid_input(std::string(what) + " config must be a JSON object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw invalid_input(std::string("unknown ") + what + " config key: " + item.key());
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const descriptors::PhogConfig& c) {
    return {{"levels", c.levels}, {"bins", c.bins}, {"signed_orientations", c.signed_orientations}};
}

descriptors::PhogConfig phog_from_json(const json& j) {
    check_keys(j, {"levels", "bins", "signed_orientations"}, "phog");
    descriptors::PhogConfig c;
    maybe(j, "levels", c.levels);
    maybe(j, "bins", c.bins);
    maybe(j, "signed_orientations", c.signed_orientations);
    return c;
}

json to_json(const descriptors::Hog3dConfig& c) {
    json axes = json::array();
    for (Index i = 0; i < c.axes.cols(); ++i)
        axes.push_back({c.axes(0, i), c.axes(1, i), c.axes(2, i)});
    return {{"cell_grid", {c.cell_grid[0], c.cell_grid[1], c.cell_grid[2]}},
            {"axes", axes},
            {"clip", c.clip}};
}

descriptors::Hog3dConfig hog3d_from_json(const json& j) {
    check_keys(j, {"cell_grid", "axes", "clip"}, "hog3d");
    descriptors::Hog3dConfig c;
    if (j.contains("cell_grid")) {
        auto g = j.at("cell_grid").get<std::vector<Index>>();
        if (g.size() != 3) throw invalid_input("cell_grid needs exactly three entries");
        c.cell_grid = {g[0], g[1], g[2]};
    }
    if (j.contains("axes")) {
        const json& a = j.at("axes");
        if (a.is_string()) {
            const std::string name = a.get<std::string>();
            if (name == "faces")
                c.axes = descriptors::Hog3dConfig::icosahedron_face_axes();
            else if (name == "vertices")
                c.axes = descriptors::Hog3dConfig::icosahedron_vertex_axes();
            else
                throw invalid_input("axes must be \"faces\", \"vertices\", or a list");
        } else {
            if (!a.is_array() || a.empty()) throw invalid_input("axes must be a nonempty list");
            c.axes.resize(3, static_cast<Index>(a.size()));
            for (std::size_t i = 0; i < a.size(); ++i) {
                auto v = a[i].get<std::vector<double>>();
                if (v.size() != 3) throw invalid_input("each axis needs three components");
                c.axes.col(static_cast<Index>(i)) << v[0], v[1], v[2];
            }
        }
    }
    maybe(j, "clip", c.clip);
    return c;
}

json to_json(const decomposition::SelectionConfig& c) {
    json out = {{"k", c.k},
                {"t", c.t},
                {"score_mode",
                 c.score_mode == decomposition::ScoreMode::absolute ? "absolute" : "signed_sum"}};
    out["theta"] = c.theta ? json(*c.theta) : json(nullptr);
    return out;
}

decomposition::SelectionConfig selection_from_json(const json& j) {
    check_keys(j, {"k", "t", "theta", "score_mode"}, "selection");
    decomposition::SelectionConfig c;
    maybe(j, "k", c.k);
    maybe(j, "t", c.t);
    if (j.contains("theta") && !j.at("theta").is_null()) c.theta = j.at("theta").get<double>();
    if (j.contains("score_mode")) {
        const std::string m = j.at("score_mode").get<std::string>();
        if (m == "absolute")
            c.score_mode = decomposition::ScoreMode::absolute;
        else if (m == "signed_sum")
            c.score_mode = decomposition::ScoreMode::signed_sum;
        else
            throw invalid_input("score_mode must be \"absolute\" or \"signed_sum\"");
    }
    return c;
}

json to_json(const solvers::AdmmConfig& c) {
    json out = {{"alpha", c.alpha},       {"lambda_budget", c.lambda_budget},
                {"rho", c.rho},           {"max_iters", c.max_iters},
                {"primal_tol", c.primal_tol}, {"dual_tol", c.dual_tol}};
    out["lambda_self"] = c.lambda_self ? json(*c.lambda_self) : json(nullptr);
    out["lambda_rest"] = c.lambda_rest ? json(*c.lambda_rest) : json(nullptr);
    return out;
}

solvers::AdmmConfig admm_from_json(const json& j) {
    check_keys(j,
               {"alpha", "lambda_budget", "rho", "max_iters", "primal_tol", "dual_tol",
                "lambda_self", "lambda_rest"},
               "admm");
    solvers::AdmmConfig c;
    maybe(j, "alpha", c.alpha);
    maybe(j, "lambda_budget", c.lambda_budget);
    maybe(j, "rho", c.rho);
    maybe(j, "max_iters", c.max_iters);
    maybe(j, "primal_tol", c.primal_tol);
    maybe(j, "dual_tol", c.dual_tol);
    if (j.contains("lambda_self") && !j.at("lambda_self").is_null())
        c.lambda_self = j.at("lambda_self").get<double>();
    if (j.contains("lambda_rest") && !j.at("lambda_rest").is_null())
        c.lambda_rest = j.at("lambda_rest").get<double>();
    return c;
}

json to_json(const decomposition::DecomposeConfig& c) {
    return {{"phog", to_json(c.phog)},
            {"selection", to_json(c.selection)},
            {"admm", to_json(c.admm)},
            {"hog3d", to_json(c.hog3d)},
            {"cuboid_count", c.cuboid_count},
            {"cuboid_width", c.cuboid_width},
            {"cuboid_height", c.cuboid_height},
            {"cuboid_depth", c.cuboid_depth},
            {"filter_threshold", c.filter_threshold},
            {"column_norm", c.column_norm == descriptors::ColumnNorm::l2 ? "l2" : "l1"}};
}

decomposition::DecomposeConfig decompose_from_json(const json& j) {
    check_keys(j,
               {"phog", "selection", "admm", "hog3d", "cuboid_count", "cuboid_width",
                "cuboid_height", "cuboid_depth", "filter_threshold", "column_norm"},
               "decompose");
    decomposition::DecomposeConfig c;
    if (j.contains("phog")) c.phog = phog_from_json(j.at("phog"));
    if (j.contains("selection")) c.selection = selection_from_json(j.at("selection"));
    if (j.contains("admm")) c.admm = admm_from_json(j.at("admm"));
    if (j.contains("hog3d")) c.hog3d = hog3d_from_json(j.at("hog3d"));
    maybe(j, "cuboid_count", c.cuboid_count);
    maybe(j, "cuboid_width", c.cuboid_width);
    maybe(j, "cuboid_height", c.cuboid_height);
    maybe(j, "cuboid_depth", c.cuboid_depth);
    maybe(j, "filter_threshold", c.filter_threshold);
    if (j.contains("column_norm")) {
        const std::string n = j.at("column_norm").get<std::string>();
        if (n == "l2")
            c.column_norm = descriptors::ColumnNorm::l2;
        else if (n == "l1")
            c.column_norm = descriptors::ColumnNorm::l1;
        else
            throw invalid_input("column_norm must be \"l1\" or \"l2\"");
    }
    return c;
}

json to_json(const features::BankConfig& c) {
    return {{"mu", c.mu},
            {"delta", c.delta},
            {"sparsity_fraction", c.sparsity_fraction},
            {"ksvd_iters", c.ksvd_iters}};
}

features::BankConfig bank_from_json(const json& j) {
    check_keys(j, {"mu", "delta", "sparsity_fraction", "ksvd_iters"}, "bank");
    features::BankConfig c;
    maybe(j, "mu", c.mu);
    maybe(j, "delta", c.delta);
    maybe(j, "sparsity_fraction", c.sparsity_fraction);
    maybe(j, "ksvd_iters", c.ksvd_iters);
    return c;
}

json to_json(const features::ItraConfig& c) {
    return {{"sparsity_fraction", c.sparsity_fraction},
            {"absolute_pooling", c.absolute_pooling},
            {"normalize_blocks", c.normalize_blocks}};
}

features::ItraConfig itra_from_json(const json& j) {
    check_keys(j, {"sparsity_fraction", "absolute_pooling", "normalize_blocks"}, "itra");
    features::ItraConfig c;
    maybe(j, "sparsity_fraction", c.sparsity_fraction);
    maybe(j, "absolute_pooling", c.absolute_pooling);
    maybe(j, "normalize_blocks", c.normalize_blocks);
    return c;
}

json to_json(const harness::SynthConfig& c) {
    return {{"classes", c.classes},
            {"train_per_class", c.train_per_class},
            {"test_per_class", c.test_per_class},
            {"frames", c.frames},
            {"height", c.height},
            {"width", c.width},
            {"noise_sigma", c.noise_sigma}};
}

harness::SynthConfig synth_from_json(const json& j) {
    check_keys(j,
               {"classes", "train_per_class", "test_per_class", "frames", "height", "width",
                "noise_sigma"},
               "synth");
    harness::SynthConfig c;
    maybe(j, "classes", c.classes);
    maybe(j, "train_per_class", c.train_per_class);
    maybe(j, "test_per_class", c.test_per_class);
    maybe(j, "frames", c.frames);
    maybe(j, "height", c.height);
    maybe(j, "width", c.width);
    maybe(j, "noise_sigma", c.noise_sigma);
    return c;
}

json to_json(const harness::ExperimentConfig& c) {
    return {{"decompose", to_json(c.decompose)},
            {"bank", to_json(c.bank)},
            {"itra", to_json(c.itra)},
            {"classifier_mu", c.classifier_mu},
            {"classifier_sparsity_fraction", c.classifier_sparsity_fraction},
            {"classifier_ksvd_iters", c.classifier_ksvd_iters},
            {"frame_method", harness::frame_method_name(c.frame_method)},
            {"descriptor_method", harness::descriptor_method_name(c.descriptor_method)}};
}

harness::ExperimentConfig experiment_from_json(const json& j) {
    check_keys(j,
               {"decompose", "bank", "itra", "classifier_mu", "classifier_sparsity_fraction",
                "classifier_ksvd_iters", "frame_method", "descriptor_method"},
               "experiment");
    harness::ExperimentConfig c;
    if (j.contains("decompose")) c.decompose = decompose_from_json(j.at("decompose"));
    if (j.contains("bank")) c.bank = bank_from_json(j.at("bank"));
    if (j.contains("itra")) c.itra = itra_from_json(j.at("itra"));
    maybe(j, "classifier_mu", c.classifier_mu);
    maybe(j, "classifier_sparsity_fraction", c.classifier_sparsity_fraction);
    maybe(j, "classifier_ksvd_iters", c.classifier_ksvd_iters);
    if (j.contains("frame_method")) {
        const std::string m = j.at("frame_method").get<std::string>();
        if (m == "proposed")
            c.frame_method = harness::FrameMethod::proposed;
        else if (m == "uniform")
            c.frame_method = harness::FrameMethod::uniform;
        else if (m == "window_clusters")
            c.frame_method = harness::FrameMethod::window_clusters;
        else
            throw invalid_input("frame_method must be proposed, uniform, or window_clusters");
    }
    if (j.contains("descriptor_method")) {
        const std::string m = j.at("descriptor_method").get<std::string>();
        if (m == "full")
            c.descriptor_method = harness::DescriptorMethod::full;
        else if (m == "shared_dictionary")
            c.descriptor_method = harness::DescriptorMethod::shared_dictionary;
        else if (m == "inter_only")
            c.descriptor_method = harness::DescriptorMethod::inter_only;
        else
            throw invalid_input(
                "descriptor_method must be full, shared_dictionary, or inter_only");
    }
    return c;
}

std::uint64_t hash(const json& j) { return fnv1a64(j.dump()); }

}  // namespace itra::config
