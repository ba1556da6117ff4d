import math

import mtpanomaly as mtp


def make_dataset(seed=3, n_normal=6, n_anomalous=2, length=60):
    cfg = mtp.SynthConfig()
    cfg.seed = seed
    cfg.n_normal = n_normal
    cfg.n_anomalous = n_anomalous
    cfg.trajectory_length = length
    spec = mtp.AnomalySpec()
    spec.kind = mtp.AnomalyKind.Jump
    spec.onset = 30
    spec.duration = 5
    cfg.anomalies = [spec]
    return mtp.generate_dataset(cfg)


def test_generate_and_io(tmp_path):
    ds = make_dataset()
    assert len(ds.trajectories) == 8
    assert all(len(t) == 60 for t in ds.trajectories)
    assert any(v == 1 for v in ds.labels.values())

    path = str(tmp_path / "data.jsonl")
    mtp.save_jsonl(ds, path)
    again = mtp.load_jsonl(path)
    assert len(again.trajectories) == len(ds.trajectories)
    # load_jsonl returns trajectories sorted by (video, track); match by id
    by_id = {t.video_id: t for t in again.trajectories}
    t0 = ds.trajectories[0]
    t1 = by_id[t0.video_id]
    assert t0.frames[5].keypoints[3].x == t1.frames[5].keypoints[3].x


def test_receptive_fields():
    cfg = mtp.ModelConfig()
    assert [mtp.receptive_field(cfg, j) for j in range(1, 8)] == [3, 5, 9, 13, 17, 21, 25]


def test_train_score_eval(tmp_path):
    ds = make_dataset()
    mc = mtp.ModelConfig()
    mc.width = 8
    mc.seed = 1
    tc = mtp.TrainConfig()
    tc.epochs = 2
    tc.batch_size = 8
    model, report = mtp.train(ds, mc, tc, mtp.Direction.Future)
    losses = [s.mean_loss for s in report.sub_epochs if not s.skipped]
    assert losses and all(math.isfinite(v) for v in losses)

    ckpt = str(tmp_path / "model.json")
    model.save_checkpoint(ckpt)
    loaded = mtp.MtpModel.load_checkpoint(ckpt)
    assert loaded.param_count() == model.param_count()

    opts = mtp.ScoringOptions()
    scores = mtp.score_dataset(model, None, ds, opts)
    assert scores.entries
    assert all(math.isfinite(e.score) for e in scores.entries.values())

    report = mtp.frame_auc(scores, ds.labels)
    assert 0.0 <= report.frame_auc <= 1.0
    assert report.positives > 0 and report.negatives > 0
