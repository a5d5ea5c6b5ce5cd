import json
import subprocess
import sys

import numpy as np
import pytest

from polygevrey.cli import INTERNAL, MATH, OK, SCHEMA_VERSION, main
from polygevrey.core import read_coefficient_csv
from polygevrey.corpus import parse_corpus
from polygevrey.decompose import sample_circle, write_samples
from polygevrey.errors import DomainError


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    doc = json.loads(out.with_suffix(".json").read_text())
    return code, doc


# ---------------------------------------------------------------- corpus ids

def test_parse_keyword_form():
    cf = parse_corpus("gevrey:c=2,k=1,N=3,Q=64")
    assert (cf.kind, cf.order, cf.q_max) == ("gevrey", 3, 64)
    assert cf.params == {"c": 2.0, "k": 1.0}
    q = np.arange(65)
    assert np.allclose(cf.sequence(), np.exp(-2 * np.sqrt(q)))
    assert cf.table().coeffs.shape == (3, 65)


def test_parse_positional_form():
    cf = parse_corpus("gevrey(1,2),N=2")
    assert cf.params == {"c": 1.0, "k": 2.0} and cf.order == 2 and cf.q_max == 512


def test_parse_finite():
    cf = parse_corpus("finite:[1;2-1i;0.5],N=2")
    assert cf.q_max == 2
    assert np.array_equal(cf.sequence(), [1, 2 - 1j, 0.5])
    assert cf.member


def test_parse_overrides_and_defaults():
    cf = parse_corpus("geometric:r=0.5", order=2, q_max=10)
    assert cf.order == 2 and cf.q_max == 10
    assert parse_corpus("polynomial_decay:q=1").member is False


@pytest.mark.parametrize("bad", ["nope:x=1", "gevrey:c=-1", "geometric:r=1", "finite:", "gevrey:z=1",
                                 "gevrey:c", "finite:1;2"])
def test_parse_rejects(bad):
    with pytest.raises(DomainError):
        parse_corpus(bad)


def test_corpus_deterministic():
    a, b = parse_corpus("gevrey:c=1,k=1,N=2"), parse_corpus("gevrey:c=1,k=1,N=2")
    assert np.array_equal(a.table().coeffs, b.table().coeffs)


# ---------------------------------------------------------------- commands

def test_decompose_finite_exact(tmp_path):
    code, doc = run(tmp_path, "decompose", "--corpus", "finite:[1;1]", "--N", "2")
    assert code == OK
    res = doc["result"]
    assert res["relative_error"] <= 1e-10 and res["max_residual"] <= 1e-10
    assert "default radii applied" in res["notes"]
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["config"]["corpus"] == "finite:[1;1]"
    entries = read_coefficient_csv(tmp_path / "out.csv")
    assert entries[(1, 1)] == pytest.approx(1.0)


def test_decompose_gevrey(tmp_path):
    code, doc = run(tmp_path, "decompose", "--corpus", "gevrey(1,1)", "--q-max", "128")
    assert code == OK and doc["result"]["relative_error"] <= 1e-8


def test_decompose_from_sample_files(tmp_path):
    P = parse_corpus("finite:[1;2;3],N=2").poly()
    files = []
    for i, r in enumerate((0.6, 0.9)):
        path = tmp_path / f"s{i}.csv"
        write_samples(path, sample_circle(P, r, 32))
        files.append(str(path))
    code, doc = run(tmp_path, "decompose", "--samples", *files, "--q-max", "4")
    assert code == OK and doc["result"]["N"] == 2


def test_expand_codes(tmp_path):
    code, doc = run(tmp_path, "expand", "--corpus", "gevrey:c=1,k=1")
    assert code == OK and doc["result"]["certificate"]["delta"] < 1
    code, doc = run(tmp_path, "expand", "--corpus", "polynomial_decay:q=1")
    assert code == MATH and doc["result"]["error"] == "NO_GEOMETRIC_DECAY"
    code, doc = run(tmp_path, "expand", "--corpus", "finite:[1;2;3]")
    assert code == OK and doc["result"]["certificate"]["finite"]


def test_verify_bounds(tmp_path):
    code, doc = run(tmp_path, "verify", "--suite", "bounds", "--count", "10", "--grid", "256")
    res = doc["result"]
    assert code == OK and res["failed"] == 0
    assert all("parameters" in r and r["holds"] for r in res["reports"])
    assert {r["name"] for r in res["reports"]} == {"estm1", "maxp0", "maxp1", "maxp2", "bw", "bw_tight"}


def test_verify_falsified_rhs(tmp_path):
    code, doc = run(tmp_path, "verify", "--suite", "bounds", "--count", "2", "--grid", "128",
                    "--falsify-rhs")
    assert code == INTERNAL
    assert doc["result"]["failed"] == 1


def run_twice(tmp_path, argv, suffix):
    out = tmp_path / "run"
    codes, blobs = [], []
    for _ in range(2):
        codes.append(main([*argv, "--out", str(out)]))
        blobs.append(out.with_suffix(suffix).read_bytes())
    return codes, blobs


def test_verify_deterministic(tmp_path):
    argv = ["verify", "--suite", "bounds", "--count", "5", "--grid", "128", "--seed", "3"]
    codes, blobs = run_twice(tmp_path, argv, ".json")
    assert codes == [OK, OK] and blobs[0] == blobs[1]


def test_approx_deterministic_csv(tmp_path):
    argv = ["approx", "--corpus", "gevrey:c=1,k=1", "--grid", "64"]
    codes, blobs = run_twice(tmp_path, argv, ".csv")
    assert codes == [OK, OK] and blobs[0] == blobs[1]
    first = blobs[0].decode().splitlines()[0]
    assert first.startswith("# ") and SCHEMA_VERSION in first


def test_dynkin_writes_field(tmp_path):
    code, doc = run(tmp_path, "dynkin", "--corpus", "gevrey:c=1,k=1,Q=128", "--grid", "128")
    res = doc["result"]
    assert code == OK and res["fit"]["C2"] > 0
    assert (tmp_path / "out_field.json").exists() and (tmp_path / "out_field.csv").exists()


def test_dynkin_from_expansion(tmp_path):
    main(["expand", "--corpus", "gevrey:c=1,k=1,Q=128", "--out", str(tmp_path / "e")])
    code, doc = run(tmp_path, "dynkin", "--expansion", str(tmp_path / "e.json"), "--grid", "128")
    assert code == OK and doc["result"]["fit"]["C2"] > 0


def test_approx_member(tmp_path):
    code, doc = run(tmp_path, "approx", "--corpus", "gevrey:c=1,k=1")
    res = doc["result"]
    assert code == OK and res["fit"]["beta"] > 0 and len(res["records"]) == 129


def test_approx_non_member(tmp_path):
    code, doc = run(tmp_path, "approx", "--corpus", "polynomial_decay:q=1")
    assert code == MATH and doc["result"]["flag"] == "NO_GEOMETRIC_DECAY"


def test_approx_finite(tmp_path):
    code, doc = run(tmp_path, "approx", "--corpus", "finite:[1;2;3]", "--n-max", "16")
    assert code == OK and doc["result"]["flag"] == "FINITE"


def test_usage_errors(capsys):
    assert main(["expand"]) == INTERNAL
    assert main(["expand", "--corpus", "nope:x=1"]) == INTERNAL
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == INTERNAL


def test_stdout_csv(capsys):
    assert main(["decompose", "--corpus", "finite:[1;1]", "--csv"]) == OK
    assert capsys.readouterr().out.startswith("component,power,re,im")


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "polygevrey.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
