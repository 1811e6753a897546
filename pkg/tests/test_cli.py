import numpy as np
import pytest

from seedmine import formats
from seedmine.cli import main
from seedmine.maps import AttentionStack
from seedmine.viz import label_colormap


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("small")
    rc = main(["synth", "--out", str(path), "--count", "6", "--mix", "0.5", "--seed", "11"])
    assert rc == 0
    return path


def test_synth_writes_expected_layout(small_corpus):
    assert (small_corpus / "corpus.manifest").exists()
    records = formats.read_manifest(small_corpus / "corpus.manifest")
    assert len(records) == 6
    for rec in records:
        for suffix in (".gt.pgm", ".sal.pgm", ".cam.fmap", ".oacam.fmap", ".pred.pgm"):
            assert (small_corpus / f"{rec.image_id}{suffix}").exists()


def test_stagewise_equals_pipeline(small_corpus, tmp_path):
    staged = tmp_path / "staged"
    piped = tmp_path / "piped"
    corpus = str(small_corpus)
    assert main(["seed", "--corpus", corpus, "--out", str(staged)]) == 0
    assert main(["pom", "--corpus", corpus, "--out", str(staged),
                 "--report", str(tmp_path / "thr.txt")]) == 0
    assert main(["nsrm", "--corpus", corpus, "--out", str(staged)]) == 0
    assert main(["pipeline", "--corpus", corpus, "--out", str(piped), "--jobs", "1"]) == 0
    for path in sorted(staged.iterdir()):
        assert path.read_bytes() == (piped / path.name).read_bytes(), path.name
    report = (tmp_path / "thr.txt").read_text()
    assert report.startswith("# img0000")
    assert any(",median," in line or ",top_quartile," in line for line in report.splitlines())


def test_pipeline_worker_count_does_not_change_outputs(small_corpus, tmp_path):
    one, many = tmp_path / "w1", tmp_path / "w2"
    corpus = str(small_corpus)
    assert main(["pipeline", "--corpus", corpus, "--out", str(one), "--jobs", "1"]) == 0
    assert main(["pipeline", "--corpus", corpus, "--out", str(many), "--jobs", "3"]) == 0
    names = sorted(p.name for p in one.iterdir())
    assert names == sorted(p.name for p in many.iterdir())
    for name in names:
        assert (one / name).read_bytes() == (many / name).read_bytes(), name


def test_eval_report_format(small_corpus, tmp_path, capsys):
    out = tmp_path / "ev"
    assert main(["pipeline", "--corpus", str(small_corpus), "--out", str(out),
                 "--jobs", "1"]) == 0
    capsys.readouterr()  # drop the pipeline summary line
    rc = main(["eval", "--gt", str(small_corpus), "--pred", str(out),
               "--pred-suffix", ".nsrm.pgm"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    iou_lines = [ln for ln in lines if "," in ln and not ln.startswith("mIoU")]
    assert iou_lines, lines
    for ln in iou_lines:
        class_id, value = ln.split(",")
        int(class_id)
        assert 0.0 <= float(value) <= 1.0
    assert any(ln.startswith("mIoU,") for ln in lines)
    assert any(ln.startswith("images=") for ln in lines)


def test_config_file_defaults_and_flag_override(small_corpus, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("t_sal = 0.95   # salient core only\njobs = 1\n")
    from_cfg = tmp_path / "cfg_out"
    assert main(["pipeline", "--corpus", str(small_corpus), "--out", str(from_cfg),
                 "--config", str(cfg)]) == 0
    explicit = tmp_path / "flag_out"
    assert main(["pipeline", "--corpus", str(small_corpus), "--out", str(explicit),
                 "--config", str(cfg), "--t-sal", "0.5", "--jobs", "1"]) == 0
    default = tmp_path / "def_out"
    assert main(["pipeline", "--corpus", str(small_corpus), "--out", str(default),
                 "--jobs", "1"]) == 0
    # config changed the result; the explicit flag wins over the config
    cfg_initial = [(from_cfg / p.name).read_bytes() for p in sorted(default.iterdir())
                   if p.name.endswith(".initial.pgm")]
    def_initial = [p.read_bytes() for p in sorted(default.iterdir())
                   if p.name.endswith(".initial.pgm")]
    assert cfg_initial != def_initial
    for p in sorted(default.iterdir()):
        assert (explicit / p.name).read_bytes() == p.read_bytes()


def test_missing_manifest_is_reported(tmp_path, capsys):
    rc = main(["pipeline", "--corpus", str(tmp_path / "nowhere")])
    assert rc == 1
    assert "corpus.manifest" in capsys.readouterr().err


def test_unknown_flag_exits_with_usage_error(small_corpus):
    with pytest.raises(SystemExit) as exc:
        main(["pipeline", "--corpus", str(small_corpus), "--frobnicate"])
    assert exc.value.code == 2


def test_viz_colormap_and_output(tmp_path, capsys):
    cmap = label_colormap()
    assert tuple(cmap[0]) == (0, 0, 0)
    assert tuple(cmap[1]) == (128, 0, 0)
    assert tuple(cmap[255]) == (224, 224, 192)

    labels = np.array([[0, 1], [255, 2]], dtype=np.uint8)
    label_path = tmp_path / "x.pgm"
    formats.write_label_map(label_path, labels)
    out_path = tmp_path / "x.ppm"
    assert main(["viz", "--label", str(label_path), "--out", str(out_path)]) == 0
    data = out_path.read_bytes()
    assert data.startswith(b"P6\n2 2\n255\n")
    assert data[11:14] == bytes(cmap[0]) and data[14:17] == bytes(cmap[1])
    assert data[17:20] == bytes(cmap[255]) and data[20:23] == bytes(cmap[2])


def test_accumulate_command(tmp_path):
    a = AttentionStack(np.array([[[0.1, 0.9]]], dtype=np.float32))
    b = AttentionStack(np.array([[[0.5, 0.2]]], dtype=np.float32))
    a.save(tmp_path / "a.fmap")
    b.save(tmp_path / "b.fmap")
    out = tmp_path / "acc.fmap"
    assert main(["accumulate", "--inputs", str(tmp_path / "a.fmap"),
                 str(tmp_path / "b.fmap"), "--out", str(out)]) == 0
    # inputs are normalized before accumulation: [0.1,0.9] -> [0,1], [0.5,0.2] -> [1,0]
    acc = AttentionStack.load(out)
    assert np.allclose(acc.values, [[[1.0, 1.0]]])


def test_train_and_cam_commands(tmp_path):
    params = tmp_path / "params.grpm"
    snaps = tmp_path / "snaps"
    feats = tmp_path / "feats"
    assert main(["train-gr", "--out", str(params), "--samples", "4", "--epochs", "3",
                 "--learning-rate", "0.1", "--snapshots-dir", str(snaps),
                 "--features-dir", str(feats)]) == 0
    assert params.exists()
    assert len(list(snaps.glob("*.grpm"))) == 3
    feat_files = sorted(feats.glob("*.feat.fmap"))
    assert len(feat_files) == 4

    cams = tmp_path / "cams"
    assert main(["cam", "--snapshots-dir", str(snaps), "--features-dir", str(feats),
                 "--out", str(cams)]) == 0
    for path in feat_files:
        image_id = path.name.removesuffix(".feat.fmap")
        cam = AttentionStack.load(cams / f"{image_id}.cam.fmap", normalized=True)
        oacam = AttentionStack.load(cams / f"{image_id}.oacam.fmap", normalized=True)
        assert cam.values.shape == oacam.values.shape
