import copy
import json

import pytest

from driftcap import certificate as C
from driftcap.cli import worker_map
from driftcap.config import RunConfig


def failing(checks):
    return [c.name for c in checks if not c.ok]


def first_box(data, sign="plus"):
    return data["branches"][0]["strips"][sign]["rects"][0]["boxes"][0]


def test_replay_passes_and_is_idempotent(param_data):
    a = C.replay(param_data)
    b = C.replay(param_data)
    assert a and not failing(a)
    assert [(c.name, c.ok) for c in a] == [(c.name, c.ok) for c in b]


def test_cone_certificate_replays(cone_cert):
    assert not failing(C.replay(cone_cert.to_dict()))


def test_json_round_trip(param_data, tmp_path):
    path = tmp_path / "cert.json"
    C.write_certificate(param_data, path)
    assert C.load_certificate(path) == json.loads(C.dumps(param_data))
    assert not failing(C.replay_file(path))


def test_flipped_sum_bit_fails(param_data):
    data = copy.deepcopy(param_data)
    box = first_box(data)
    lo = float.fromhex(box[1][0])
    # an exponent bit: the stored lower bound doubles and no longer encloses the sum
    box[1][0] = (lo * 2.0).hex()
    assert "branch 0 S+: stored sum enclosures" in failing(C.replay(data))


def test_decremented_witness_fails(param_data):
    data = copy.deepcopy(param_data)
    box = first_box(data, "minus")
    box[2] = int(box[2]) - 1
    assert "branch 0 S-: return witnesses" in failing(C.replay(data))


def test_dropped_sub_box_fails(param_data):
    data = copy.deepcopy(param_data)
    rects = data["branches"][0]["strips"]["plus"]["rects"]
    rect = next(r for r in rects if len(r["boxes"]) > 1)
    rect["boxes"].pop()
    assert "branch 0 S+: sub-boxes tile rectangles" in failing(C.replay(data))


def test_tampered_threshold_fails(param_data):
    data = copy.deepcopy(param_data)
    data["C"] = (float.fromhex(data["C"]) * 0.5).hex()
    bad = failing(C.replay(data))
    assert "tail constants" in bad


def test_tampered_chart_fails(param_data):
    data = copy.deepcopy(param_data)
    chart = data["charts"]["unstable"]
    chart["scale"] = (float.fromhex(chart["scale"]) * 1.01).hex()
    assert "chart unstable: rebuilt and revalidated" in failing(C.replay(data))


def test_corrupted_hex_is_a_format_error(param_data):
    data = copy.deepcopy(param_data)
    first_box(data)[1][0] = "0xnonsense"
    with pytest.raises(C.CertificateFormatError):
        C.replay(data)
    with pytest.raises(C.CertificateFormatError):
        C.replay({"alpha": "0x1p+2"})


def test_load_rejects_foreign_files(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"format": "other"}')
    with pytest.raises(C.CertificateFormatError):
        C.load_certificate(p)
    p.write_text("{")
    with pytest.raises(C.CertificateFormatError):
        C.load_certificate(p)
    with pytest.raises(C.CertificateFormatError):
        C.load_certificate(tmp_path / "missing.json")


def test_certificate_content(param_cert, param_data):
    assert param_data["format"] == C.FORMAT and param_data["version"] == C.VERSION
    assert param_data["backend"] == "param"
    assert [c["text"] for c in param_data["certified_action_intervals"]] == [
        "1/5 .. pi - 1/10", "pi + 1/10 .. 2*pi - 1/5"]
    assert param_cert.threshold.lo > 0.0
    assert 3 - 2 * 2 ** 0.5 in param_cert.lam.inflate(1e-15)
    assert param_cert.lam.hi < 0.18


def test_deterministic_across_runs_and_workers(small_config, small_cert):
    again = C.certify_diffusion(small_config, "param")
    assert C.dumps(again) == C.dumps(small_cert)
    with worker_map(2) as mapper:
        pooled = C.certify_diffusion(small_config, "param", mapper)
    assert C.dumps(pooled) == C.dumps(small_cert)


def test_failure_stages():
    with pytest.raises(C.CertificationError) as exc:
        C.certify_diffusion(RunConfig(backend="param", spans=["3 .. 3.3"]), "param")
    assert exc.value.stage == "strips"
    with pytest.raises(C.CertificationError) as exc:
        C.certify_diffusion(RunConfig(alpha=0.15, spans=[], inflation=1e-7), "cone")
    assert exc.value.stage == "charts"
    with pytest.raises(C.CertificationError) as exc:
        C.homoclinic_guess(RunConfig(alpha=3.0, guess="tabulated", spans=[]))
    assert exc.value.stage == "guess"
