#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itra/classifier.hpp"
#include "itra/config_json.hpp"
#include "itra/decomposition.hpp"
#include "itra/features.hpp"
#include "itra/harness.hpp"
#include "itra/solvers.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace itra;

namespace {

json parse(const std::string& text, const char* what) {
    try {
        return text.empty() ? json::object() : json::parse(text);
    } catch (const json::exception& e) {
        throw invalid_input(std::string(what) + " is not valid JSON: " + e.what());
    }
}

decomposition::VideoTensor to_video(const std::vector<Matrix>& frames) {
    decomposition::VideoTensor v;
    v.frames = frames;
    v.id = "py";
    return v;
}

py::dict report_dict(const harness::EvalReport& rep) {
    py::dict d;
    d["accuracy"] = rep.accuracy;
    d["per_class_recall"] = rep.per_class_recall;
    d["confusion"] = rep.confusion;
    d["seed"] = rep.seed;
    d["config_hash"] = rep.config_hash;
    return d;
}

}  // namespace

PYBIND11_MODULE(_itra, m) {
    m.doc() = "Key-sequence video decomposition, relative descriptors, and "
              "sparse-reconstruction classification";

    py::register_exception<invalid_input>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<invalid_dictionary>(m, "InvalidDictionary", PyExc_ValueError);
    py::register_exception<empty_result>(m, "EmptyResult", PyExc_RuntimeError);
    py::register_exception<io_error>(m, "IoError", PyExc_OSError);

    m.def(
        "omp",
        [](const Matrix& atoms, const Vector& signal, Index sparsity) {
            solvers::Dictionary d;
            d.atoms = atoms;
            solvers::SparseCode code = solvers::omp(d, signal, sparsity);
            return py::make_tuple(code.support, code.coefficients);
        },
        py::arg("atoms"), py::arg("signal"), py::arg("sparsity"),
        "Greedy sparse coding; returns (support, full-length coefficients).");

    m.def(
        "ksvd",
        [](const Matrix& data, Index n_atoms, Index sparsity, int iters,
           std::uint64_t seed) {
            solvers::KsvdResult r = solvers::ksvd(data, n_atoms, sparsity, iters, seed);
            return py::make_tuple(r.dictionary.atoms, r.error_trace);
        },
        py::arg("data"), py::arg("n_atoms"), py::arg("sparsity"), py::arg("iters"),
        py::arg("seed"), "Dictionary learning; returns (atoms, error_trace).");

    m.def(
        "joint_row_sparse",
        [](const Matrix& z_self, const Matrix& z_rest, const std::string& admm_json) {
            const auto cfg = config::admm_from_json(parse(admm_json, "admm config"));
            solvers::RowSparseSolution sol =
                solvers::solve_joint_row_sparse(z_self, z_rest, cfg);
            return py::make_tuple(sol.w_self, sol.w_rest, sol.objective_trace.back());
        },
        py::arg("z_self"), py::arg("z_rest"), py::arg("admm_config") = "",
        "Joint row-sparse self-expression; returns (w_self, w_rest, objective).");

    m.def(
        "phog",
        [](const Frame& frame, const std::string& cfg_json) {
            return descriptors::phog(frame,
                                     config::phog_from_json(parse(cfg_json, "phog config")));
        },
        py::arg("frame"), py::arg("config") = "",
        "Pyramid orientation-histogram descriptor of one frame.");

    m.def("uniform_keyframes", &harness::baseline_uniform_keyframes, py::arg("n_frames"),
          py::arg("k"), "Evenly spaced key-frame indices.");

    m.def("itra_dim", &features::itra_dim, py::arg("c"), py::arg("k"),
          "Relative-descriptor length for c classes and k positions.");

    m.def(
        "decompose",
        [](const std::vector<Matrix>& frames, const Matrix& class_frames,
           const std::string& cfg_json, int reference_class, std::uint64_t seed) {
            const auto cfg = config::decompose_from_json(parse(cfg_json, "decompose config"));
            decomposition::KeySequenceSet ks =
                decomposition::decompose(to_video(frames), class_frames, cfg,
                                         reference_class, seed);
            std::vector<Index> centers;
            std::vector<Matrix> blocks;
            for (const auto& s : ks.sequences) {
                centers.push_back(s.key_frame_index);
                blocks.push_back(s.cuboid_descriptors);
            }
            py::dict out;
            out["key_frames"] = centers;
            out["cuboid_descriptors"] = blocks;
            return out;
        },
        py::arg("frames"), py::arg("class_frames") = Matrix(),
        py::arg("config") = "", py::arg("reference_class") = -1, py::arg("seed") = 0,
        "Key-sequence decomposition of a list of frames.");

    m.def(
        "synth_dataset",
        [](const std::string& cfg_json, std::uint64_t seed) {
            harness::Dataset ds =
                harness::synth_gen(config::synth_from_json(parse(cfg_json, "synth config")),
                                   seed);
            py::list videos;
            for (const auto& lv : ds.videos) {
                py::dict v;
                v["id"] = lv.video.id;
                v["class_id"] = lv.class_id;
                v["split"] = lv.split == harness::Split::train ? "train" : "test";
                v["frames"] = lv.video.frames;
                videos.append(v);
            }
            py::dict out;
            out["classes"] = ds.classes;
            out["videos"] = videos;
            return out;
        },
        py::arg("config") = "", py::arg("seed") = 0,
        "Synthetic labeled videos; dict with class names and per-video frames.");

    m.def(
        "evaluate",
        [](const std::vector<int>& predictions, const std::vector<int>& truth,
           int n_classes) { return report_dict(harness::evaluate(predictions, truth, n_classes)); },
        py::arg("predictions"), py::arg("truth"), py::arg("n_classes"),
        "Accuracy, confusion matrix, and per-class recall.");

    m.def(
        "run_experiment",
        [](const std::string& synth_json, const std::string& experiment_json,
           std::uint64_t seed) {
            harness::Dataset ds = harness::synth_gen(
                config::synth_from_json(parse(synth_json, "synth config")), seed);
            harness::EvalReport rep = harness::run_experiment(
                ds, config::experiment_from_json(parse(experiment_json, "experiment config")),
                seed);
            return report_dict(rep);
        },
        py::arg("synth_config") = "", py::arg("experiment_config") = "",
        py::arg("seed") = 0,
        "End-to-end train/test run on a synthetic dataset; returns the report.");
}
