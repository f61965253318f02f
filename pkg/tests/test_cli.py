import numpy as np
import pytest

from hnswmerge.cli import main
from hnswmerge.io import load_index, read_ivecs, write_fvecs

TINY_CONFIG = """
[data]
synthetic_n = 300
synthetic_queries = 10
synthetic_dim = 8
[run]
seed = 3
Ls = 16,24
[build]
M = 6
M0 = 12
ef_construction = 16
[merge]
local_ef = 16
"""


@pytest.fixture
def data(tmp_path):
    rng = np.random.default_rng(0)
    write_fvecs(tmp_path / "base.fvecs", rng.normal(size=(200, 6)).astype(np.float32))
    write_fvecs(tmp_path / "q.fvecs", rng.normal(size=(8, 6)).astype(np.float32))
    return tmp_path


def build_pair(d, capsys):
    for name, rng_ in (("a", "0:100"), ("b", "100:200")):
        code = main(["build", "--input", str(d / "base.fvecs"), "--out", str(d / f"{name}.idx"),
                     "--M", "6", "--M0", "12", "--efc", "16", "--range", rng_])
        assert code == 0
    return capsys.readouterr().out


def test_build_prints_count_and_writes_index(data, capsys):
    out = build_pair(data, capsys)
    assert out.splitlines()[0].startswith("build_dc=")
    assert len(load_index(data / "a.idx").index) == 100


@pytest.mark.parametrize("algo", ["sigm", "ngm", "igtm", "cgtm"])
def test_merge_outputs_loadable_index(data, capsys, algo):
    build_pair(data, capsys)
    code = main(["merge", "--a", str(data / "a.idx"), "--b", str(data / "b.idx"), "--algo", algo,
                 "--out", str(data / "c.idx"), "--local-ef", "16"])
    assert code == 0
    out = capsys.readouterr().out.strip()
    assert out.startswith("merge_dc=") and int(out.split("=")[1]) > 0
    merged = load_index(data / "c.idx").index
    assert len(merged) == 200
    merged.check_invariants()


def test_ground_truth_and_search_bench(data, capsys):
    build_pair(data, capsys)
    assert main(["ground-truth", "--base", str(data / "base.fvecs"), "--queries", str(data / "q.fvecs"),
                 "--k", "5", "--out", str(data / "gt.ivecs")]) == 0
    assert len(read_ivecs(data / "gt.ivecs")) == 8
    main(["merge", "--a", str(data / "a.idx"), "--b", str(data / "b.idx"), "--algo", "ngm",
          "--out", str(data / "c.idx"), "--local-ef", "16"])
    assert main(["search-bench", "--index", str(data / "c.idx"), "--queries", str(data / "q.fvecs"),
                 "--gt", str(data / "gt.ivecs"), "--L", "8,16,32", "--out", str(data / "r.csv")]) == 0
    lines = (data / "r.csv").read_text().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == "algorithm,merge_dc,L,recall_at_5,avg_search_dc"
    assert len(lines[1:]) == 3 + 1


def test_missing_file_is_usage_error(data, capsys):
    code = main(["build", "--input", str(data / "nope.fvecs"), "--out", str(data / "x.idx")])
    assert code == 2
    err = capsys.readouterr().err
    assert "no such file" in err and len(err.strip().splitlines()) == 1


def test_bad_flag_is_usage_error(data):
    with pytest.raises(SystemExit) as exc:
        main(["build", "--input", str(data / "base.fvecs"), "--out", "x", "--range", "5:2"])
    assert exc.value.code == 2


def test_range_beyond_data_is_usage_error(data):
    assert main(["build", "--input", str(data / "base.fvecs"), "--out", str(data / "x.idx"),
                 "--range", "0:999"]) == 2


def test_runtime_failure_exit_code(data, capsys):
    (data / "bad.idx").write_bytes(b"garbage-bytes-not-an-index")
    code = main(["merge", "--a", str(data / "bad.idx"), "--b", str(data / "bad.idx"), "--algo", "ngm",
                 "--out", str(data / "c.idx")])
    assert code == 1
    assert "FormatError" in capsys.readouterr().err


def test_bench_all_is_byte_reproducible(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text(TINY_CONFIG)
    for out in ("r1.csv", "r2.csv"):
        assert main(["bench-all", "--config", str(cfg), "--out", str(tmp_path / out)]) == 0
    first, second = (tmp_path / "r1.csv").read_bytes(), (tmp_path / "r2.csv").read_bytes()
    assert first == second
    assert len(first.decode().splitlines()) == 2 + 4 * 2
    printed = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in printed[:4]] == ["sigm", "ngm", "igtm", "cgtm"]


def test_bench_all_without_output(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(TINY_CONFIG)
    assert main(["bench-all", "--config", str(cfg)]) == 2


def test_bench_all_on_sift_descriptors(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text(TINY_CONFIG.replace("[data]\n", "[data]\nsource = sift\n").replace("synthetic_dim = 8\n", ""))
    assert main(["bench-all", "--config", str(cfg), "--out", str(tmp_path / "r.csv")]) == 0
    rows = (tmp_path / "r.csv").read_text().splitlines()[2:]
    assert len(rows) == 8 and all(float(r.split(",")[3]) > 0.5 for r in rows)
