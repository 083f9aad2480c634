import numpy as np
import pytest

from cipher_icl import corpus
from conftest import ASSET_CORPUS
from cipher_icl.cli import main

pytestmark = pytest.mark.usefixtures("small_cache")


@pytest.fixture()
def small_cache(tmp_path, monkeypatch):
    """A small but usable corpus cache plus an isolated cache dir."""
    rng = np.random.default_rng(0)
    text = ASSET_CORPUS.read_text()[:60_000]
    stream = corpus.build_stream([text])
    path = tmp_path / "corpus.bin"
    corpus.save_stream(stream, path)
    monkeypatch.setenv("CIPHER_ICL_CACHE", str(tmp_path / "cachedir"))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_prep_counts_letters(tmp_path, capsys):
    src = tmp_path / "in.txt"
    src.write_text("Hello!")
    out = tmp_path / "c.bin"
    code, stdout, _ = run(capsys, "prep", src, "--out", out)
    assert code == 0
    assert "5 letters" in stdout
    assert corpus.load_stream(out).data.tolist() == [7, 4, 11, 11, 14]


def test_prep_concatenates_in_argument_order(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("abc")
    b.write_text("def")
    out = tmp_path / "c.bin"
    code, *_ = run(capsys, "prep", a, b, "--out", out)
    assert code == 0
    assert corpus.load_stream(out).data.tolist() == [0, 1, 2, 3, 4, 5]


def test_prep_reports_top_letters(tmp_path, capsys):
    src = tmp_path / "in.txt"
    src.write_text(ASSET_CORPUS.read_text()[:100_000])
    code, stdout, _ = run(capsys, "prep", src, "--out", tmp_path / "c.bin")
    assert code == 0
    assert "top letters: e:" in stdout


def test_prep_missing_file_fails(tmp_path, capsys):
    code, _, stderr = run(capsys, "prep", tmp_path / "nope.txt", "--out", tmp_path / "c.bin")
    assert code == 1
    assert "error" in stderr.lower()


def test_train_paper_preset_echo(capsys):
    code, stdout, _ = run(capsys, "train", "--preset", "paper", "--dry-run")
    assert code == 0
    for token in ("batch=64", "steps=20000", "lr=0.001", "wd=0.1"):
        assert token in stdout


def test_train_rejects_zero_batch(capsys):
    code, _, stderr = run(capsys, "train", "--preset", "desk", "--batch", "0", "--dry-run")
    assert code == 2
    assert "usage error" in stderr


def test_train_smoke(tmp_path, small_cache, capsys):
    out = tmp_path / "run"
    code, stdout, _ = run(
        capsys,
        "train", "--corpus", small_cache, "--out", out, "--quiet",
        "--scheme", "mono", "--layers", "1", "--heads", "2", "--dim", "16",
        "--context", "16", "--batch", "2", "--steps", "3",
    )
    assert code == 0
    assert (out / "final.ckpt").exists()
    assert (out / "train.log").read_text().count("\n") >= 1
    assert "done: final loss" in stdout


def test_train_config_file_and_override(tmp_path, small_cache, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("batch = 8\nsteps = 5\nlr = 0.002\n")
    code, stdout, _ = run(capsys, "train", "--config", cfg, "--steps", "7", "--dry-run")
    assert code == 0
    assert "batch=8" in stdout and "steps=7" in stdout and "lr=0.002" in stdout


def test_train_config_file_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    code, _, stderr = run(capsys, "train", "--config", cfg, "--dry-run")
    assert code == 2
    assert "unknown key" in stderr


def test_eval_baseline_writes_expected_csv(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code, *_ = run(
        capsys,
        "eval", "--baseline", "mono_naive", "--scheme", "mono", "--dist", "uniform",
        "--max-examples", "1", "--n-prompts", "100", "--out", out,
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "scheme,key_len,message_dist,decoder,examples,accuracy,n,stderr"
    assert len(lines) == 3
    assert lines[1] == "mono,-,uniform,mono_naive,0,0.000000,100,0.000000"


def test_eval_vig_naive_saturates(tmp_path, capsys):
    out = tmp_path / "vig.csv"
    code, *_ = run(
        capsys,
        "eval", "--baseline", "vig_naive", "--scheme", "vig", "--key-len", "8",
        "--dist", "uniform", "--max-examples", "16", "--n-prompts", "50", "--out", out,
    )
    assert code == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    for row in rows:
        j, acc = int(row[4]), float(row[5])
        if j >= 8:
            assert acc == 1.0


def test_eval_vig_search_curve(tmp_path, capsys):
    # the search decoder through the CLI: sound everywhere, exact once the
    # stragglers among the candidate lengths are eliminated
    out = tmp_path / "search.csv"
    code, *_ = run(
        capsys,
        "eval", "--baseline", "vig_search", "--scheme", "vig-var",
        "--dist", "uniform", "--max-examples", "40", "--n-prompts", "60",
        "--seed", "2", "--out", out,
    )
    assert code == 0
    acc = {int(r.split(",")[4]): float(r.split(",")[5]) for r in out.read_text().splitlines()[1:]}
    assert all(acc[j] == 1.0 for j in range(36, 41))
    assert acc[16] == 0.0  # strict agreement abstains below the max candidate


def test_eval_infers_vig_scheme_from_key_len(tmp_path, capsys):
    out = tmp_path / "v.csv"
    code, *_ = run(
        capsys,
        "eval", "--baseline", "vig_naive", "--key-len", "4", "--dist", "uniform",
        "--max-examples", "6", "--n-prompts", "20", "--out", out,
    )
    assert code == 0
    assert out.read_text().splitlines()[1].startswith("vig,4,")


def test_eval_deterministic_bytes(tmp_path, small_cache, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = [
        "eval", "--baseline", "mono_freq", "--scheme", "mono", "--dist", "corpus",
        "--corpus", small_cache, "--max-examples", "8", "--n-prompts", "40", "--seed", "11",
    ]
    assert run(capsys, *args, "--out", a)[0] == 0
    assert run(capsys, *args, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_eval_requires_decoder_choice(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--scheme", "mono", "--out", str(tmp_path / "x.csv")])
    assert exc.value.code == 2


def test_eval_model_checkpoint(tmp_path, small_cache, capsys):
    out = tmp_path / "run"
    run(
        capsys,
        "train", "--corpus", small_cache, "--out", out, "--quiet",
        "--layers", "1", "--heads", "2", "--dim", "16", "--context", "32",
        "--batch", "2", "--steps", "2",
    )
    csv = tmp_path / "model.csv"
    code, *_ = run(
        capsys,
        "eval", "--checkpoint", out / "final.ckpt", "--scheme", "mono",
        "--dist", "corpus", "--corpus", small_cache,
        "--max-examples", "10", "--n-prompts", "20", "--out", csv,
    )
    assert code == 0
    lines = csv.read_text().splitlines()
    assert len(lines) == 12
    assert lines[1].split(",")[3] == "model"


def test_eval_model_context_too_short_is_usage_error(tmp_path, small_cache, capsys):
    out = tmp_path / "run"
    run(
        capsys,
        "train", "--corpus", small_cache, "--out", out, "--quiet",
        "--layers", "1", "--heads", "2", "--dim", "16", "--context", "16",
        "--batch", "2", "--steps", "1",
    )
    code, _, stderr = run(
        capsys,
        "eval", "--checkpoint", out / "final.ckpt", "--scheme", "mono",
        "--dist", "uniform", "--max-examples", "40", "--n-prompts", "5",
        "--out", tmp_path / "x.csv",
    )
    assert code == 2
    assert "context" in stderr


def test_ablate_batch_grid(tmp_path, small_cache, capsys):
    out = tmp_path / "ablate"
    code, stdout, _ = run(
        capsys,
        "ablate", "--grid", "batch=2,3", "--corpus", small_cache, "--out", out,
        "--layers", "1", "--heads", "2", "--dim", "16", "--context", "16",
        "--steps", "2", "--quiet",
    )
    assert code == 0
    assert (out / "batch=2.log").exists()
    assert (out / "batch=3.log").exists()
    assert (out / "batch=2" / "final.ckpt").exists()


def test_ablate_context_grid(tmp_path, small_cache, capsys):
    out = tmp_path / "ablate-ctx"
    code, *_ = run(
        capsys,
        "ablate", "--grid", "context=8,16", "--corpus", small_cache, "--out", out,
        "--layers", "1", "--heads", "2", "--dim", "16", "--batch", "2",
        "--steps", "2", "--quiet",
    )
    assert code == 0
    assert (out / "context=8.log").exists()
    assert (out / "context=16.log").exists()


def test_ablate_malformed_grid(tmp_path, capsys):
    code, _, stderr = run(
        capsys, "ablate", "--grid", "batch=", "--out", tmp_path / "x",
    )
    assert code == 2
    assert "usage error" in stderr


def test_threads_flag_validates(capsys):
    code, _, stderr = run(capsys, "--threads", "0", "train", "--dry-run")
    assert code == 2
