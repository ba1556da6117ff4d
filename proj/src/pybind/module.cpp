// Python bindings for the main operations: synthetic data generation,
// dataset I/O, training, scoring, and evaluation.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mtp/evaluator.hpp"
#include "mtp/model.hpp"
#include "mtp/scorer.hpp"
#include "mtp/synthgen.hpp"
#include "mtp/trainer.hpp"
#include "mtp/trajectory.hpp"

namespace py = pybind11;
using namespace mtp;

PYBIND11_MODULE(_core, m) {
    m.doc() = "multi-timescale pose-trajectory anomaly detection";

    py::class_<Keypoint>(m, "Keypoint")
        .def(py::init<>())
        .def_readwrite("x", &Keypoint::x)
        .def_readwrite("y", &Keypoint::y)
        .def_readwrite("c", &Keypoint::c);

    py::class_<PoseFrame>(m, "PoseFrame")
        .def(py::init<>())
        .def_readwrite("frame_index", &PoseFrame::frame_index)
        .def_readwrite("keypoints", &PoseFrame::keypoints);

    py::class_<PoseTrajectory>(m, "PoseTrajectory")
        .def(py::init<>())
        .def_readwrite("track_id", &PoseTrajectory::track_id)
        .def_readwrite("video_id", &PoseTrajectory::video_id)
        .def_readwrite("frames", &PoseTrajectory::frames)
        .def_readwrite("width", &PoseTrajectory::width)
        .def_readwrite("height", &PoseTrajectory::height)
        .def("__len__", &PoseTrajectory::length)
        .def("reversed", &PoseTrajectory::reversed);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("trajectories", &Dataset::trajectories)
        .def_readwrite("labels", &Dataset::labels);

    m.def("load_jsonl", &load_jsonl, py::arg("path"));
    m.def("save_jsonl", &save_jsonl, py::arg("dataset"), py::arg("path"));
    m.def("load_labels_csv", &load_labels_csv, py::arg("path"));
    m.def("save_labels_csv", &save_labels_csv, py::arg("labels"), py::arg("path"));
    m.def("normalize", &normalize, py::arg("trajectory"));
    m.def("denormalize", &denormalize, py::arg("trajectory"));

    py::enum_<Direction>(m, "Direction")
        .value("Future", Direction::Future)
        .value("Past", Direction::Past);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("width", &ModelConfig::width)
        .def_readwrite("kernel_sizes", &ModelConfig::kernel_sizes)
        .def_readwrite("supervised", &ModelConfig::supervised)
        .def_readwrite("seed", &ModelConfig::seed)
        .def("validate", &ModelConfig::validate);

    m.def("receptive_field", &receptive_field, py::arg("config"), py::arg("layer"));

    py::class_<MtpModel>(m, "MtpModel")
        .def(py::init<Direction, ModelConfig>())
        .def_property_readonly("direction", &MtpModel::direction)
        .def_property_readonly("config", &MtpModel::config)
        .def("param_count", &MtpModel::param_count)
        .def("save_checkpoint", &MtpModel::save_checkpoint)
        .def_static("load_checkpoint", &MtpModel::load_checkpoint);

    py::class_<AdamConfig>(m, "AdamConfig")
        .def(py::init<>())
        .def_readwrite("lr", &AdamConfig::lr)
        .def_readwrite("beta1", &AdamConfig::beta1)
        .def_readwrite("beta2", &AdamConfig::beta2)
        .def_readwrite("eps", &AdamConfig::eps);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("adam", &TrainConfig::adam)
        .def_readwrite("lr_decay", &TrainConfig::lr_decay)
        .def_readwrite("window_stride", &TrainConfig::window_stride)
        .def_readwrite("shuffle_seed", &TrainConfig::shuffle_seed)
        .def_readwrite("normalize_input", &TrainConfig::normalize_input);

    py::class_<SubEpochStats>(m, "SubEpochStats")
        .def_readonly("epoch", &SubEpochStats::epoch)
        .def_readonly("sub_epoch", &SubEpochStats::sub_epoch)
        .def_readonly("timescale", &SubEpochStats::timescale)
        .def_readonly("mean_loss", &SubEpochStats::mean_loss)
        .def_readonly("window_count", &SubEpochStats::window_count)
        .def_readonly("skipped", &SubEpochStats::skipped);

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("sub_epochs", &TrainReport::sub_epochs)
        .def_readonly("epoch_loss", &TrainReport::epoch_loss)
        .def("to_json", &TrainReport::to_json);

    m.def("train", &train, py::arg("dataset"), py::arg("model_config"),
          py::arg("train_config"), py::arg("direction"));

    py::enum_<AnomalyKind>(m, "AnomalyKind")
        .value("Jump", AnomalyKind::Jump)
        .value("Loiter", AnomalyKind::Loiter)
        .value("Run", AnomalyKind::Run);

    py::class_<AnomalySpec>(m, "AnomalySpec")
        .def(py::init<>())
        .def_readwrite("kind", &AnomalySpec::kind)
        .def_readwrite("onset", &AnomalySpec::onset)
        .def_readwrite("duration", &AnomalySpec::duration);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("seed", &SynthConfig::seed)
        .def_readwrite("n_normal", &SynthConfig::n_normal)
        .def_readwrite("n_anomalous", &SynthConfig::n_anomalous)
        .def_readwrite("trajectory_length", &SynthConfig::trajectory_length)
        .def_readwrite("stride_px", &SynthConfig::stride_px)
        .def_readwrite("osc_amplitude", &SynthConfig::osc_amplitude)
        .def_readwrite("osc_period", &SynthConfig::osc_period)
        .def_readwrite("noise_std", &SynthConfig::noise_std)
        .def_readwrite("width", &SynthConfig::width)
        .def_readwrite("height", &SynthConfig::height)
        .def_readwrite("anomalies", &SynthConfig::anomalies);

    m.def("generate_dataset", &generate_dataset, py::arg("config"));

    py::class_<ScoringOptions>(m, "ScoringOptions")
        .def(py::init<>())
        .def_readwrite("stride", &ScoringOptions::stride)
        .def_readwrite("timescales", &ScoringOptions::timescales)
        .def_readwrite("use_future", &ScoringOptions::use_future)
        .def_readwrite("use_past", &ScoringOptions::use_past)
        .def_readwrite("no_person_score", &ScoringOptions::no_person_score)
        .def_readwrite("threads", &ScoringOptions::threads);

    py::class_<ScoreEntry>(m, "ScoreEntry")
        .def_readonly("score", &ScoreEntry::score)
        .def_readonly("coverage", &ScoreEntry::coverage)
        .def_readonly("flag", &ScoreEntry::flag);

    py::class_<ScoreSeries>(m, "ScoreSeries")
        .def(py::init<>())
        .def_readonly("entries", &ScoreSeries::entries);

    m.def(
        "score_dataset",
        [](const MtpModel* fut, const MtpModel* past, const Dataset& ds,
           const ScoringOptions& opts) { return score_dataset(fut, past, ds, opts); },
        py::arg("future_model").none(true), py::arg("past_model").none(true),
        py::arg("dataset"), py::arg("options"));
    m.def("apply_threshold", &apply_threshold, py::arg("scores"), py::arg("threshold"));
    m.def("save_scores_csv", &save_scores_csv, py::arg("scores"), py::arg("path"));
    m.def("load_scores_csv", &load_scores_csv, py::arg("path"));

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("frame_auc", &EvalReport::frame_auc)
        .def_readonly("positives", &EvalReport::positives)
        .def_readonly("negatives", &EvalReport::negatives)
        .def_readonly("unscored_labeled", &EvalReport::unscored_labeled)
        .def_readonly("per_video_auc", &EvalReport::per_video_auc)
        .def("to_json", &EvalReport::to_json);

    m.def("frame_auc", &frame_auc, py::arg("scores"), py::arg("labels"),
          py::arg("no_person_score") = 0.0);
}
