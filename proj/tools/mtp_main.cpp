// mtp: multi-timescale pose-trajectory anomaly detection CLI.
//
// Subcommands: synth | train | score | eval | inspect, driven by a JSON
// config file; flags override config keys. Exit codes: 0 success, 1 usage,
// 2 I/O, 3 data, 4 model mismatch, 5 evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtp/evaluator.hpp"
#include "mtp/model.hpp"
#include "mtp/scorer.hpp"
#include "mtp/synthgen.hpp"
#include "mtp/trainer.hpp"
#include "mtp/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;
constexpr int kExitModelMismatch = 4;
constexpr int kExitEval = 5;

struct RunConfig {
    mtp::ModelConfig model;
    mtp::TrainConfig train;
    mtp::SynthConfig synth;
    mtp::ScoringOptions score;
    double threshold = -1.0;  // < 0: emit raw scores without flags
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mtp::IoError("cannot open config " + path);
    return json::parse(in);
}

RunConfig parse_config(const std::string& path) {
    RunConfig rc;
    if (path.empty()) return rc;
    const json cfg = load_json(path);
    if (cfg.contains("model")) {
        const json& m = cfg["model"];
        if (m.contains("width")) rc.model.width = m["width"].get<std::size_t>();
        if (m.contains("kernel_sizes"))
            rc.model.kernel_sizes = m["kernel_sizes"].get<std::vector<std::size_t>>();
        if (m.contains("supervised"))
            rc.model.supervised = m["supervised"].get<std::vector<std::pair<int, int>>>();
        if (m.contains("seed")) rc.model.seed = m["seed"].get<std::uint64_t>();
    }
    if (cfg.contains("train")) {
        const json& t = cfg["train"];
        if (t.contains("epochs")) rc.train.epochs = t["epochs"].get<std::size_t>();
        if (t.contains("batch_size")) rc.train.batch_size = t["batch_size"].get<std::size_t>();
        if (t.contains("lr")) rc.train.adam.lr = t["lr"].get<double>();
        if (t.contains("beta1")) rc.train.adam.beta1 = t["beta1"].get<double>();
        if (t.contains("beta2")) rc.train.adam.beta2 = t["beta2"].get<double>();
        if (t.contains("eps")) rc.train.adam.eps = t["eps"].get<double>();
        if (t.contains("lr_decay")) rc.train.lr_decay = t["lr_decay"].get<double>();
        if (t.contains("window_stride"))
            rc.train.window_stride = t["window_stride"].get<std::size_t>();
        if (t.contains("shuffle_seed"))
            rc.train.shuffle_seed = t["shuffle_seed"].get<std::uint64_t>();
        if (t.contains("checkpoint_interval"))
            rc.train.checkpoint_interval = t["checkpoint_interval"].get<std::size_t>();
        if (t.contains("normalize_input"))
            rc.train.normalize_input = t["normalize_input"].get<bool>();
    }
    if (cfg.contains("synth")) {
        const json& s = cfg["synth"];
        if (s.contains("seed")) rc.synth.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("n_normal")) rc.synth.n_normal = s["n_normal"].get<std::size_t>();
        if (s.contains("n_anomalous"))
            rc.synth.n_anomalous = s["n_anomalous"].get<std::size_t>();
        if (s.contains("trajectory_length"))
            rc.synth.trajectory_length = s["trajectory_length"].get<std::size_t>();
        if (s.contains("stride_px")) rc.synth.stride_px = s["stride_px"].get<double>();
        if (s.contains("osc_amplitude"))
            rc.synth.osc_amplitude = s["osc_amplitude"].get<double>();
        if (s.contains("osc_period")) rc.synth.osc_period = s["osc_period"].get<double>();
        if (s.contains("noise_std")) rc.synth.noise_std = s["noise_std"].get<double>();
        if (s.contains("width")) rc.synth.width = s["width"].get<std::size_t>();
        if (s.contains("height")) rc.synth.height = s["height"].get<std::size_t>();
        if (s.contains("anomalies")) {
            for (const json& a : s["anomalies"]) {
                mtp::AnomalySpec spec;
                spec.kind = mtp::anomaly_kind_from_string(a["kind"].get<std::string>());
                spec.onset = a["onset"].get<std::size_t>();
                spec.duration = a["duration"].get<std::size_t>();
                rc.synth.anomalies.push_back(spec);
            }
        }
    }
    if (cfg.contains("score")) {
        const json& s = cfg["score"];
        if (s.contains("stride")) rc.score.stride = s["stride"].get<std::size_t>();
        if (s.contains("no_person_score"))
            rc.score.no_person_score = s["no_person_score"].get<double>();
        if (s.contains("threshold")) rc.threshold = s["threshold"].get<double>();
    }
    return rc;
}

mtp::MtpModel load_model_checked(const std::string& path, const mtp::ModelConfig& expect,
                                 bool check_config) {
    mtp::MtpModel model = mtp::MtpModel::load_checkpoint(path);
    if (check_config) {
        const mtp::ModelConfig& got = model.config();
        if (got.width != expect.width || got.kernel_sizes != expect.kernel_sizes ||
            got.supervised != expect.supervised)
            throw std::runtime_error("checkpoint " + path +
                                     " does not match the configured architecture");
    }
    return model;
}

int cmd_synth(const RunConfig& rc, const std::string& out_dir) {
    try {
        mtp::Dataset ds = mtp::generate_dataset(rc.synth);
        fs::create_directories(out_dir);
        mtp::save_jsonl(ds, out_dir + "/data.jsonl");
        mtp::save_labels_csv(ds.labels, out_dir + "/labels.csv");
        std::size_t anomalous = 0;
        for (const auto& [fk, l] : ds.labels) anomalous += l;
        std::cout << "wrote " << ds.trajectories.size() << " trajectories ("
                  << rc.synth.n_normal << " normal, " << rc.synth.n_anomalous
                  << " anomalous), " << ds.labels.size() << " labeled frames ("
                  << anomalous << " anomalous)\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "synth: " << e.what() << '\n';
        return kExitIo;
    }
}

int cmd_train(RunConfig rc, const std::string& data_path, const std::string& out_dir,
              const std::string& resume_future, const std::string& resume_past) {
    mtp::Dataset ds;
    try {
        ds = mtp::load_jsonl(data_path);
        fs::create_directories(out_dir);
    } catch (const std::exception& e) {
        std::cerr << "train: " << e.what() << '\n';
        return kExitIo;
    }
    try {
        json report;
        for (const auto dir : {mtp::Direction::Future, mtp::Direction::Past}) {
            const std::string name = mtp::to_string(dir);
            const std::string ckpt = out_dir + "/" + name + ".ckpt";
            rc.train.checkpoint_path = ckpt;
            std::optional<mtp::MtpModel> model;
            const std::string& resume =
                dir == mtp::Direction::Future ? resume_future : resume_past;
            if (!resume.empty())
                model.emplace(load_model_checked(resume, rc.model, true));
            else
                model.emplace(dir, rc.model);
            mtp::TrainReport tr = mtp::train_into(*model, ds, rc.train);
            model->save_checkpoint(ckpt);
            report[name] = json::parse(tr.to_json());
            std::ofstream csv(out_dir + "/" + name + "_losses.csv");
            csv << tr.to_csv();
            std::cout << name << ": final epoch loss "
                      << (tr.epoch_loss.empty() ? 0.0 : tr.epoch_loss.back()) << '\n';
        }
        std::ofstream rf(out_dir + "/report.json");
        rf << report.dump(2) << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "train: " << e.what() << '\n';
        return kExitData;
    }
}

int cmd_score(RunConfig rc, const std::string& data_path, const std::string& future_ckpt,
              const std::string& past_ckpt, const std::string& out_path,
              const std::string& dump_path, const std::string& direction,
              const std::vector<int>& timescales, bool have_config) {
    mtp::Dataset ds;
    try {
        ds = mtp::load_jsonl(data_path);
    } catch (const std::exception& e) {
        std::cerr << "score: " << e.what() << '\n';
        return kExitIo;
    }
    rc.score.timescales = timescales;
    if (direction == "future") rc.score.use_past = false;
    else if (direction == "past") rc.score.use_future = false;
    else if (direction != "both") {
        std::cerr << "score: unknown direction '" << direction << "'\n";
        return kExitUsage;
    }
    try {
        std::optional<mtp::MtpModel> future, past;
        if (rc.score.use_future)
            future.emplace(load_model_checked(future_ckpt, rc.model, have_config));
        if (rc.score.use_past)
            past.emplace(load_model_checked(past_ckpt, rc.model, have_config));
        mtp::ScoreSeries scores =
            mtp::score_dataset(future ? &*future : nullptr, past ? &*past : nullptr, ds,
                               rc.score);
        if (rc.threshold >= 0.0) mtp::apply_threshold(scores, rc.threshold);
        mtp::save_scores_csv(scores, out_path);
        if (!dump_path.empty()) {
            std::vector<mtp::PersonErrors> persons;
            for (const auto& traj : ds.trajectories)
                persons.push_back(mtp::person_errors(future ? &*future : nullptr,
                                                     past ? &*past : nullptr, traj,
                                                     rc.score));
            mtp::save_timescale_csv(persons, dump_path);
        }
        std::cout << "scored " << scores.entries.size() << " frames -> " << out_path << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "score: " << e.what() << '\n';
        return kExitModelMismatch;
    }
}

int cmd_eval(const RunConfig& rc, const std::string& scores_path,
             const std::string& labels_path, const std::string& out_path,
             const std::string& roc_path) {
    mtp::ScoreSeries scores;
    std::map<mtp::FrameKey, int> labels;
    try {
        scores = mtp::load_scores_csv(scores_path);
        labels = mtp::load_labels_csv(labels_path);
    } catch (const std::exception& e) {
        std::cerr << "eval: " << e.what() << '\n';
        return kExitIo;
    }
    try {
        mtp::EvalReport report = mtp::frame_auc(scores, labels, rc.score.no_person_score);
        std::ofstream out(out_path);
        if (!out) throw mtp::IoError("cannot write " + out_path);
        out << report.to_json() << '\n';
        if (!roc_path.empty()) {
            std::vector<double> s;
            std::vector<int> l;
            for (const auto& [fk, label] : labels) {
                auto it = scores.entries.find(fk);
                s.push_back(it == scores.entries.end() ? rc.score.no_person_score
                                                       : it->second.score);
                l.push_back(label);
            }
            mtp::save_roc_csv(mtp::roc_curve(s, l), roc_path);
        }
        std::cout << "frame_auc " << report.frame_auc << " (" << report.positives
                  << " pos, " << report.negatives << " neg, " << report.unscored_labeled
                  << " unscored)\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "eval: " << e.what() << '\n';
        return kExitEval;
    }
}

int cmd_inspect(const RunConfig& rc, const std::string& data_path,
                const std::string& future_ckpt, const std::string& past_ckpt,
                const std::string& out_dir) {
    try {
        mtp::Dataset ds = mtp::load_jsonl(data_path);
        std::cout << ds.trajectories.size() << " trajectories\n";
        for (const auto& t : ds.trajectories)
            std::cout << "  " << t.video_id << '/' << t.track_id << ": T=" << t.length()
                      << " frames [" << t.start_frame() << ", "
                      << t.start_frame() + static_cast<std::int64_t>(t.length()) - 1
                      << "]\n";
        if (future_ckpt.empty() && past_ckpt.empty()) return 0;
        fs::create_directories(out_dir);
        std::optional<mtp::MtpModel> future, past;
        if (!future_ckpt.empty()) future.emplace(mtp::MtpModel::load_checkpoint(future_ckpt));
        if (!past_ckpt.empty()) past.emplace(mtp::MtpModel::load_checkpoint(past_ckpt));
        std::vector<mtp::PersonErrors> persons;
        for (const auto& traj : ds.trajectories)
            persons.push_back(mtp::person_errors(future ? &*future : nullptr,
                                                 past ? &*past : nullptr, traj, rc.score));
        mtp::save_timescale_csv(persons, out_dir + "/timescale_errors.csv");
        std::cout << "wrote " << out_dir << "/timescale_errors.csv\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "inspect: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-timescale pose-trajectory anomaly detection"};
    app.require_subcommand(1);

    std::string config_path, out = "out";
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    app.add_option("--config", config_path, "JSON run config")->expected(1);
    app.add_option("--seed", seed, "override all seeds");
    app.add_option("--threads", threads, "worker cap (1 = bitwise deterministic)");
    app.add_option("--out", out, "output directory or file");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");

    auto* train = app.add_subcommand("train", "train future and past models");
    std::string data_path, resume_future, resume_past;
    train->add_option("--data", data_path, "trajectories (JSON Lines)")->required();
    train->add_option("--resume-future", resume_future, "continue from checkpoint");
    train->add_option("--resume-past", resume_past, "continue from checkpoint");

    auto* score = app.add_subcommand("score", "score trajectories");
    std::string future_ckpt = "future.ckpt", past_ckpt = "past.ckpt", dump_path;
    std::string direction = "both";
    std::vector<int> timescales;
    score->add_option("--data", data_path, "trajectories (JSON Lines)")->required();
    score->add_option("--future", future_ckpt, "future-model checkpoint");
    score->add_option("--past", past_ckpt, "past-model checkpoint");
    score->add_option("--direction", direction, "future | past | both");
    score->add_option("--timescales", timescales, "restrict to these timescales");
    score->add_option("--dump", dump_path, "also write per-timescale errors CSV");

    auto* eval = app.add_subcommand("eval", "frame-level ROC AUC");
    std::string scores_path, labels_path, roc_path;
    eval->add_option("--scores", scores_path, "scores CSV")->required();
    eval->add_option("--labels", labels_path, "labels CSV")->required();
    eval->add_option("--roc", roc_path, "also write ROC points CSV");

    auto* inspect = app.add_subcommand("inspect", "dataset summary and error dumps");
    inspect->add_option("--data", data_path, "trajectories (JSON Lines)")->required();
    inspect->add_option("--future", future_ckpt, "future-model checkpoint")
        ->default_val("");
    inspect->add_option("--past", past_ckpt, "past-model checkpoint")->default_val("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    RunConfig rc;
    try {
        rc = parse_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << '\n';
        return kExitIo;
    }
    if (seed) {
        rc.model.seed = *seed;
        rc.synth.seed = *seed;
        rc.train.shuffle_seed = *seed;
    }
    rc.score.threads = threads;

    if (synth->parsed()) return cmd_synth(rc, out);
    if (train->parsed()) return cmd_train(rc, data_path, out, resume_future, resume_past);
    if (score->parsed())
        return cmd_score(rc, data_path, future_ckpt, past_ckpt, out, dump_path, direction,
                         timescales, !config_path.empty());
    if (eval->parsed()) return cmd_eval(rc, scores_path, labels_path, out, roc_path);
    if (inspect->parsed()) return cmd_inspect(rc, data_path, future_ckpt, past_ckpt, out);
    return kExitUsage;
}
