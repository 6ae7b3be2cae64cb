import io as stdio
import json

from nilops import io
from nilops.catalog import rp2
from nilops.cli import INPUT_ERROR, NOT_MET, OK, main


def run(*argv):
    out = stdio.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv, "--json")
    return code, json.loads(text) if text.strip() else None


def test_check_module_accepts_builtin():
    code, doc = run_json("check-module", "builtin:rp2", "--unstable")
    assert code == OK and doc["violations"] == [] and doc["unstable"] is True


def test_check_module_flags_adem_failure(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"window": [0, 3], "complete": True, "dims": {"1": 1, "2": 1, "3": 1},
                             "sq": [{"i": 1, "from_degree": 1, "rows": ["1"]},
                                    {"i": 1, "from_degree": 2, "rows": ["1"]}]}))
    code, doc = run_json("check-module", str(p))
    assert code == INPUT_ERROR
    assert doc["violations"][0]["kind"] == "adem"


def test_malformed_json_is_an_input_error(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{"window": [0, 2],\n "dims": {"1": 1 "2": 1}}')
    code, text = run("nilfilt", str(p))
    assert code == INPUT_ERROR and text == ""
    assert f"{p}:2:" in capsys.readouterr().err


def test_wrong_bitstring_is_located(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"window": [0, 3], "dims": {"1": 1, "2": 1},
                             "sq": [{"i": 1, "from_degree": 1, "rows": ["10"]}]}))
    assert run("nilfilt", str(p))[0] == INPUT_ERROR
    assert ".sq[0].rows[0]" in capsys.readouterr().err


def test_nilfilt_on_rp2():
    code, doc = run_json("nilfilt", "builtin:rp2", "--smax", "3")
    assert code == OK
    assert doc["nil"]["1"] == {"1": 1, "2": 1} and doc["nil"]["2"] == {"2": 1}
    assert doc["rho"]["1"] == {"0": 1} and doc["rho"]["2"] == {"0": 1}


def test_file_and_builtin_agree(tmp_path):
    p = tmp_path / "rp2.json"
    p.write_text(io.dumps(io.module_to_dict(rp2())))
    assert run_json("nilfilt", str(p))[1]["nil"] == run_json("nilfilt", "builtin:rp2")[1]["nil"]


def test_export_round_trips(tmp_path):
    code, text = run("export", "module", "builtin:rp:3")
    assert code == OK
    p = tmp_path / "rp3.json"
    p.write_text(text)
    m = io.load_module(p)
    assert m.dims == {1: 1, 2: 1, 3: 1}
    code, text = run("export", "functor", "S2")
    assert code == OK and json.loads(text)["dims"] == [0, 1, 3, 6]


def test_obstruction_fires_and_is_reproducible():
    first = run("obstruction", "--n", "2", "--f1", "Id", "--json")
    second = run("obstruction", "--n", "2", "--f1", "Id", "--json")
    assert first[0] == OK and json.loads(first[1])["verdict"] == "fires"
    assert first == second


def test_obstruction_verdicts_from_the_cli():
    assert run_json("obstruction", "--n", "2", "--f1", "Id", "--k", "zero")[1]["verdict"] == "consistent"
    code, doc = run_json("obstruction", "--n", "2", "--f1", "l:builtin:rpinf", "--window", "0,16")
    assert code == NOT_MET and doc["verdict"] == "hypothesis-not-met"
    code, doc = run_json("obstruction", "--n", "2", "--module", "builtin:free:1")
    assert code == NOT_MET and doc["membership"] == "not-member"


def test_detection_outside_its_hypothesis_exits_two():
    code, doc = run_json("functor", "detect", "--map", "g2_to_id")
    assert code == NOT_MET and doc["status"] == "hypothesis-not-met"
    assert run_json("functor", "detect", "--map", "l2_to_t2")[0] == OK


def test_uncertified_degree_exits_two():
    code, doc = run_json("functor", "degree", "--functor", "S3")
    assert code == NOT_MET and doc["certified"] is False and doc["lower_bound"] == 3
    code, doc = run_json("functor", "degree", "--functor", "S3", "--kmax", "4")
    assert code == OK and doc["degree"] == 3


def test_unknown_functor_is_an_input_error():
    assert run("functor", "degree", "--functor", "Q7")[0] == INPUT_ERROR


def test_thread_variable_is_validated(monkeypatch):
    monkeypatch.setenv("NILOPS_THREADS", "zero")
    assert run("nilfilt", "builtin:rp2")[0] == INPUT_ERROR
    monkeypatch.setenv("NILOPS_THREADS", "2")
    assert run("nilfilt", "builtin:rp2")[0] == OK


def test_parallel_localization_matches_serial(monkeypatch):
    monkeypatch.setenv("NILOPS_THREADS", "1")
    serial = run("localize", "builtin:free:1", "--window", "0,16", "--json")
    monkeypatch.setenv("NILOPS_THREADS", "3")
    assert run("localize", "builtin:free:1", "--window", "0,16", "--json") == serial


def test_outputs_stop_at_their_trust_degree():
    code, doc = run_json("op", "loops", "builtin:rpinf", "--window", "0,8")
    assert code == OK
    top = doc["result"]["trust"]
    assert all(int(d) <= top for d in doc["result"]["dims"])


def test_trust_policy_when_nothing_is_trusted():
    # the socle series is exact only through degree 1, below the bottom class
    code, doc = run_json("nilfilt", "builtin:free:2", "--window", "0,3")
    assert code == NOT_MET and doc == {"status": "trust-exhausted", "trust_degree": 1}
    code, doc = run_json("nilfilt", "builtin:free:2", "--window", "0,3", "--trust-policy", "warn")
    assert code == OK and doc["trust"] == 1 and doc["warnings"]


def test_negative_parameters_rejected():
    assert run("nilfilt", "builtin:rp2", "--smax", "-1")[0] == INPUT_ERROR


def test_realizability_gate():
    code, doc = run_json("realizability", "builtin:rp2", "--n", "1")
    assert code in (OK, NOT_MET) and "conditions" in doc
