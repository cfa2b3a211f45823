import csv

import pytest

from playstyle.cli import main
from playstyle.dataset import load_dataset
from playstyle.hsd import init_model, load_model


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def data_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cands, targets = root / "d", root / "t"
    assert main(["gen-data", "--speeds", "60,80", "--noise-levels", "0", "--samples", "96", "--seed", "7",
                 "--out", str(cands)]) == 0
    assert main(["gen-data", "--speeds", "60,80", "--noise-levels", "0", "--samples", "96", "--seed", "7",
                 "--role", "targets", "--trials", "2", "--out", str(targets)]) == 0
    return root, cands, targets


@pytest.mark.parametrize("t,expected", [("1", 0.940), ("2", 1.225)])
def test_golden_distance(capsys, t, expected):
    code, out, _ = run(capsys, "distance", "--golden-appendix-b", "--t", t)
    assert code == 0
    value = float(out.splitlines()[0].split(":")[1])
    assert value == pytest.approx(expected, abs=1e-3)


def test_golden_uniform(capsys):
    code, out, _ = run(capsys, "distance", "--golden-appendix-b", "--t", "1", "--aggregation", "uniform",
                       "--per-state")
    assert code == 0
    assert float(out.splitlines()[0].split(":")[1]) == pytest.approx(0.880, abs=1e-3)
    assert len([l for l in out.splitlines() if "d=" in l]) == 3


def test_gen_data_manifest_and_reproducible(data_dirs, tmp_path, capsys):
    _, cands, targets = data_dirs
    rows = list(csv.DictReader(open(cands / "manifest.csv")))
    assert [r["style_id"] for r in rows] == ["s60_n0", "s80_n0"]
    assert len(list(csv.DictReader(open(targets / "manifest.csv")))) == 4
    again = tmp_path / "again"
    assert main(["gen-data", "--speeds", "60,80", "--noise-levels", "0", "--samples", "96", "--seed", "7",
                 "--out", str(again)]) == 0
    for r in rows:
        assert (again / r["file"]).read_bytes() == (cands / r["file"]).read_bytes()
    assert (again / "manifest.csv").read_text() == (cands / "manifest.csv").read_text()


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "gen-data", "--samples", "0", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "distance", "--t", "1")[0] == 2
    assert run(capsys, "no-such-command")[0] == 2


def test_distance_undefined_and_self(data_dirs, capsys):
    _, cands, _ = data_dirs
    a, b = str(cands / "s60_n0.psty"), str(cands / "s80_n0.psty")
    code, out, _ = run(capsys, "distance", a, a, "--mapper", "lrd", "--t", "1")
    assert code == 0 and float(out.splitlines()[0].split(":")[1]) == 0.0
    code, out, _ = run(capsys, "distance", a, b, "--mapper", "pixel", "--t", "5")
    assert code == 4 and "undefined" in out


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.psty"
    bad.write_bytes(b"NOPE")
    assert run(capsys, "distance", str(bad), str(bad))[0] == 3
    assert run(capsys, "distance", str(tmp_path / "missing.psty"), str(bad))[0] == 3


def test_accuracy_self_targets_is_perfect(data_dirs, tmp_path, capsys):
    _, cands, _ = data_dirs
    out_csv = tmp_path / "acc.csv"
    code, out, _ = run(capsys, "accuracy", "--candidates", str(cands), "--targets", str(cands),
                       "--mapper", "lrd", "--t", "1", "--csv", str(out_csv))
    assert code == 0
    rows = list(csv.DictReader(open(out_csv)))
    assert rows[0]["configuration"] == "lrd(8,8,16)" and float(rows[0]["accuracy"]) == 100.0


def test_accuracy_missing_candidate(data_dirs, tmp_path, capsys):
    _, cands, targets = data_dirs
    (tmp_path / "manifest.csv").write_text(
        (cands / "manifest.csv").read_text().splitlines()[0] + "\n"
        + f"{cands / 's60_n0.psty'},s60_n0,60,0,candidates,0\n"
    )
    assert run(capsys, "accuracy", "--candidates", str(tmp_path), "--targets", str(targets))[0] == 2


def test_train_zero_epochs_equals_init(data_dirs, tmp_path, capsys):
    _, cands, _ = data_dirs
    out = tmp_path / "m.hsdm"
    code, _, _ = run(capsys, "train-hsd", "--data", str(cands), "--K", "2", "--B", "20", "--seed", "1",
                     "--epochs", "0", "--out", str(out))
    assert code == 0
    model = load_model(out)
    assert model.config.state_space(1) == 2**20
    assert model == init_model(model.config)
    assert (tmp_path / "m.csv").read_text().strip() == "step,L_rec,L_vq0,L_vq1,L_pi"


def test_train_seeds_and_hsd_accuracy(data_dirs, tmp_path, capsys):
    _, cands, targets = data_dirs
    paths = []
    for seed in (1, 2):
        p = tmp_path / f"m{seed}.hsdm"
        assert main(["train-hsd", "--data", str(cands), "--seed", str(seed), "--epochs", "1",
                     "--out", str(p)]) == 0
        paths.append(p)
    assert paths[0].read_bytes() != paths[1].read_bytes()
    log_rows = list(csv.DictReader(open(tmp_path / "m1.csv")))
    assert len(log_rows) == 3 and set(log_rows[0]) == {"step", "L_rec", "L_vq0", "L_vq1", "L_pi"}
    capsys.readouterr()
    code, out, _ = run(capsys, "accuracy", "--candidates", str(cands), "--targets", str(targets),
                       "--mapper", "hsd", "--model", str(paths[0]), "--model", str(paths[1]), "--t", "1")
    assert code == 0
    assert [l.split()[0] for l in out.splitlines()[1:]] == ["hsd[0]", "hsd[1]", "hsd[mean]"]
    code, out, _ = run(capsys, "codebook-usage", "--model", str(paths[0]), "--data", str(cands))
    assert code == 0 and "distinct codes" in out


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# resolved settings\nsamples=12\nseed=3\nnoise-levels=1..3\n")
    code, out, _ = run(capsys, "gen-data", "--config", str(cfg), "--seed", "9", "--print-config")
    assert code == 0
    resolved = dict(line.split("=", 1) for line in out.splitlines())
    assert resolved["samples"] == "12" and resolved["seed"] == "9" and resolved["noise_levels"] == "1,2,3"
    cfg.write_text("bogus=1\n")
    assert run(capsys, "gen-data", "--config", str(cfg))[0] == 2


def test_loaded_dataset_ids(data_dirs):
    _, cands, _ = data_dirs
    ds = load_dataset(cands / "s60_n0.psty")
    assert ds.id == "s60_n0" and len(ds) == 96
