"""CLI contract: subcommands, exit codes, determinism, schema validity."""

import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from studioscope.cli import main, parse_config_file
from studioscope.features import write_wav

from conftest import corpus_csv_text, make_row


def _schema(name: str) -> dict:
    ref = resources.files("studioscope") / "schemas" / f"{name}.schema.json"
    return json.loads(ref.read_text(encoding="utf-8"))


def _validate(payload, name: str):
    jsonschema.validate(payload, _schema(name))


@pytest.fixture
def toy_corpus(tmp_path):
    rng = np.random.default_rng(7)
    rows = []
    styles = ["house", "trance", "tekkno"]
    for i in range(120):
        nation = "G" if i % 2 else "U"
        year = 1984 + i % 11
        rows.append(make_row(
            f"T{i:03d}", nation=nation, year=year, style=styles[i % 3],
            bpm=f"{110 + 40 * rng.random() + (8 if nation == 'G' else 0):.6f}",
            phase_space=f"{0.2 + 0.6 * rng.random():.6f}",
            channel_correlation=f"{0.9 - 0.8 * rng.random():.6f}",
            crest_factor=f"{1.5 + 3.0 * rng.random():.6f}",
        ))
    path = tmp_path / "toy.csv"
    path.write_text(corpus_csv_text(rows), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# analyze


def test_analyze_writes_valid_reports(toy_corpus, tmp_path, capsys):
    out = tmp_path / "reports"
    assert main(["analyze", str(toy_corpus), str(out)]) == 0
    manova = json.loads((out / "manova.json").read_text())
    anova = json.loads((out / "anova.json").read_text())
    boxplots = json.loads((out / "boxplots.json").read_text())
    _validate(manova, "manova")
    _validate(anova, "anova")
    _validate(boxplots, "boxplots")
    assert {r["effect"] for r in manova} == {"nation", "year", "interaction"}
    assert len(anova) == 12
    assert "Wilks lambda" in capsys.readouterr().out


def test_analyze_categorical_flag(toy_corpus, tmp_path):
    out = tmp_path / "reports"
    assert main(["analyze", str(toy_corpus), str(out),
                 "--year-coding", "categorical"]) == 0
    _validate(json.loads((out / "manova.json").read_text()), "manova")


def test_analyze_small_corpus_still_writes_boxplots(tmp_path, capsys):
    rows = [make_row("A", nation="G", year=1990), make_row("B", nation="U", year=1991)]
    corpus = tmp_path / "small.csv"
    corpus.write_text(corpus_csv_text(rows), encoding="utf-8")
    out = tmp_path / "reports"
    assert main(["analyze", str(corpus), str(out)]) == 0
    assert json.loads((out / "manova.json").read_text()) == []
    boxplots = json.loads((out / "boxplots.json").read_text())
    _validate(boxplots, "boxplots")
    assert "WARN SmallSample" in capsys.readouterr().err


def test_analyze_empty_corpus_exit_2(tmp_path, capsys):
    corpus = tmp_path / "empty.csv"
    corpus.write_text(corpus_csv_text([]), encoding="utf-8")
    assert main(["analyze", str(corpus), str(tmp_path / "r")]) == 2
    assert "EmptyCorpus" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# som


def test_som_outputs_and_determinism(toy_corpus, tmp_path):
    out1 = tmp_path / "som1"
    out2 = tmp_path / "som2"
    args = ["som", str(toy_corpus), "--seed", "11"]
    assert main(args[:2] + [str(out1)] + args[2:]) == 0
    assert main(args[:2] + [str(out2)] + args[2:]) == 0
    for name in ("map_bundle.json", "variance.json", "distances.json", "som.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    bundle = json.loads((out1 / "map_bundle.json").read_text())
    _validate(bundle, "map_bundle")
    _validate(json.loads((out1 / "variance.json").read_text()), "variance")
    _validate(json.loads((out1 / "distances.json").read_text()), "distances")
    _validate(json.loads((out1 / "som.json").read_text()), "som_grid")
    assert len(bundle["tracks"]) == 120
    width = bundle["som"]["grid"]["width"]
    height = bundle["som"]["grid"]["height"]
    for track in bundle["tracks"]:
        assert 0 <= track["unit_x"] < width
        assert 0 <= track["unit_y"] < height


def test_som_config_file_and_flag_precedence(toy_corpus, tmp_path):
    config = tmp_path / "som.cfg"
    config.write_text("som.width = 7\nsom.height = 5\nseed = 3\n# comment\n",
                      encoding="utf-8")
    out = tmp_path / "som"
    assert main(["som", str(toy_corpus), str(out), "--config", str(config),
                 "--seed", "4"]) == 0
    grid = json.loads((out / "som.json").read_text())
    assert grid["width"] == 7 and grid["height"] == 5
    assert grid["config"]["seed"] == 4  # flag beats file


# ---------------------------------------------------------------------------
# classify


def test_classify_outputs(toy_corpus, tmp_path):
    out = tmp_path / "clf"
    assert main(["classify", str(toy_corpus), "G", str(out), "--seed", "2",
                 "--config", str(_forest_cfg(tmp_path))]) == 0
    metrics = json.loads((out / "metrics_G.json").read_text())
    _validate(metrics, "metrics")
    lines = (out / "confusion_G.csv").read_text().strip().splitlines()
    classes = metrics["classes"]
    assert lines[0] == "style," + ",".join(classes)
    for line, cls in zip(lines[1:], classes):
        cells = line.split(",")
        assert cells[0] == cls
        total = sum(float(c) for c in cells[1:])
        assert total == pytest.approx(100.0, abs=0.2) or total == 0.0


def _forest_cfg(tmp_path):
    path = tmp_path / "forest.cfg"
    path.write_text("forest.n_trees = 20\nforest.cv_folds = 5\n", encoding="utf-8")
    return path


def test_classify_unknown_nation_usage_error(toy_corpus, tmp_path, capsys):
    code = main(["classify", str(toy_corpus), "X", str(tmp_path / "o")])
    assert code == 1
    assert "ERROR Usage" in capsys.readouterr().err


def test_classify_repeated_mode(toy_corpus, tmp_path):
    out = tmp_path / "clf"
    assert main(["classify", str(toy_corpus), "U", str(out), "--cv", "repeated",
                 "--config", str(_forest_cfg(tmp_path))]) == 0
    metrics = json.loads((out / "metrics_U.json").read_text())
    assert metrics["cv_mode"] == "repeated"


# ---------------------------------------------------------------------------
# extract + bundle


def test_extract_cli_and_bundle_roundtrip(tmp_path, capsys):
    sr = 22050
    audio_dir = tmp_path / "audio"
    audio_dir.mkdir()
    rng = np.random.default_rng(0)
    meta_rows = ["filename,track_id,title,artist,label,nation,year,style"]
    for i, bpm in enumerate((118.0, 124.0, 131.0, 139.0)):
        n = int(8.0 * sr)
        mono = np.zeros(n)
        period = 60.0 / bpm * sr
        k = 0
        while int(round(k * period)) < n - 4:
            s = int(round(k * period))
            mono[s:s + 3] = [0.5 + 0.1 * i, 0.3, 0.1]
            k += 1
        t = np.arange(n) / sr
        pad = (0.1 + 0.1 * i) * np.sin(2 * np.pi * (100 + 30 * i) * t)
        write_wav(audio_dir / f"track{i}.wav", np.clip(mono + pad, -1, 1),
                  np.clip(mono + (0.5 - 0.2 * i) * pad, -1, 1), sr)
        meta_rows.append(f"track{i}.wav,X{i:02d},Song {i},Artist,Label,"
                         f"{'G' if i % 2 else 'U'},{1990 + i},house")
    meta = tmp_path / "meta.csv"
    meta.write_text("\n".join(meta_rows) + "\n", encoding="utf-8")

    out_csv = tmp_path / "corpus.csv"
    assert main(["extract", str(audio_dir), str(meta), str(out_csv)]) == 0
    sidecar = json.loads((tmp_path / "corpus.csv.norm.json").read_text())
    _validate(sidecar, "norm_sidecar")

    # rerun (with threads) is byte-identical
    out2 = tmp_path / "corpus2.csv"
    assert main(["extract", str(audio_dir), str(meta), str(out2),
                 "--threads", "4"]) == 0
    assert out_csv.read_bytes() == out2.read_bytes()

    # som -> bundle rebuild with stats attached
    som_dir = tmp_path / "som"
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text("som.width = 3\nsom.height = 2\nsom.epochs = 4\n", encoding="utf-8")
    assert main(["som", str(out_csv), str(som_dir), "--config", str(cfg)]) == 0
    reports = tmp_path / "reports"
    assert main(["analyze", str(out_csv), str(reports)]) == 0
    bundle_path = tmp_path / "bundle.json"
    assert main(["bundle", str(out_csv), str(som_dir / "som.json"),
                 str(bundle_path), "--stats-dir", str(reports)]) == 0
    bundle = json.loads(bundle_path.read_text())
    _validate(bundle, "map_bundle")
    assert "boxplots" in bundle["stats_summary"]


def test_extract_missing_metadata_exit_2(tmp_path, capsys):
    code = main(["extract", str(tmp_path), str(tmp_path / "nope.csv"),
                 str(tmp_path / "out.csv")])
    assert code == 2
    assert "MissingMetadata" in capsys.readouterr().err


def test_usage_error_on_unknown_command(capsys):
    assert main(["frobnicate"]) == 1
    assert "ERROR Usage" in capsys.readouterr().err


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("a = 1\n# full comment\nb.c = hello  # trailing\n\n",
                   encoding="utf-8")
    assert parse_config_file(cfg) == {"a": "1", "b.c": "hello"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("not a pair\n", encoding="utf-8")
    from studioscope.errors import UsageError
    with pytest.raises(UsageError):
        parse_config_file(bad)
