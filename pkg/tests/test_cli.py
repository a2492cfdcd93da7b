import json

import pytest

from walkre.cli import run


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run(["gen-data", "--generator", "two_hop", "--n", "12", "--seed", "1", "--out", str(root / "train.jsonl")]) == 0
    assert run(["gen-data", "--generator", "two_hop", "--n", "6", "--seed", "2", "--out", str(root / "dev.jsonl")]) == 0
    return root


SMALL = ["--n-w", "6", "--n-e", "6", "--n-t", "3", "--n-p", "3", "--n-s", "5", "--max-epochs", "2", "--quiet"]


def test_gen_data_is_reproducible(data, tmp_path):
    out = tmp_path / "again.jsonl"
    run(["gen-data", "--generator", "two_hop", "--n", "12", "--seed", "1", "--out", str(out)])
    assert out.read_bytes() == (data / "train.jsonl").read_bytes()


def test_identical_files_score_perfectly(data, capsys):
    gold = str(data / "dev.jsonl")
    assert run(["eval", "--gold", gold, "--pred", gold]) == 0
    assert capsys.readouterr().out.strip() == "P=1.000 R=1.000 F1=1.000"


def test_train_predict_eval(data, tmp_path, capsys):
    ckpt = tmp_path / "m.ckpt"
    args = ["train", "--config", "l4", "--train", str(data / "train.jsonl"), "--dev", str(data / "dev.jsonl"), "--out", str(ckpt)]
    assert run(args + SMALL) == 0
    log = (tmp_path / "m.ckpt.log").read_text().splitlines()
    assert log[0].startswith("epoch   1") and log[-1].startswith("best epoch")
    first = ckpt.read_bytes()
    assert run(args + SMALL) == 0
    assert ckpt.read_bytes() == first

    pred = tmp_path / "p.jsonl"
    assert run(["predict", "--checkpoint", str(ckpt), "--corpus", str(data / "dev.jsonl"), "--out", str(pred)]) == 0
    capsys.readouterr()
    assert run(["eval", "--gold", str(data / "dev.jsonl"), "--pred", str(pred), "--corpus", str(data / "dev.jsonl"),
                "--compare", str(pred), "--iterations", "50", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["approx_randomization_p"] == 1.0
    assert "by_entity_count" in report


def test_print_config_applies_overrides(capsys):
    assert run(["train", "--config", "l4", "--beta", "0.5", "--use-context", "false", "--print-config"]) == 0
    out = capsys.readouterr().out
    assert "beta = 0.5" in out and "use_context = false" in out and "walk_length = 4" in out


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "my.cfg"
    cfg.write_text("# custom\nwalk_length = 2\nlr = 0.01\n")
    assert run(["train", "--config", str(cfg), "--lr", "0.5", "--print-config"]) == 0
    out = capsys.readouterr().out
    assert "walk_length = 2" in out and "lr = 0.5" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--gold", "missing.jsonl", "--pred", "missing.jsonl"],
        ["train", "--config", "nope.cfg", "--print-config"],
        ["predict", "--checkpoint", "missing.ckpt", "--corpus", "x", "--out", "y"],
        ["gen-data", "--generator", "missing.json", "--out", "z"],
    ],
)
def test_failures_give_one_line_and_nonzero(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) != 0
    err = capsys.readouterr().err.strip()
    assert err and "\n" not in err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("learning_rate = 0.1\n")
    assert run(["train", "--config", str(cfg), "--print-config"]) == 1
    assert "unknown config keys" in capsys.readouterr().err


def test_bad_usage_exits_nonzero(capsys):
    for argv in (["frobnicate"], ["eval", "--nope"], []):
        with pytest.raises(SystemExit) as info:
            run(argv)
        assert info.value.code != 0
        assert len(capsys.readouterr().err.strip().splitlines()) == 1


def test_gradcheck_command(capsys):
    assert run(["gradcheck", "--seed", "3", "--dims", "tiny"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS worst relative error")
