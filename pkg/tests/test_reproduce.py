import json

import pytest

from levykit.cli import _dumps
from levykit.reproduce import FIXTURE_NAMES, compare, load_fixture, qkey, run_fixture


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_canonical_fixture_passes(name):
    bundle = run_fixture(name)
    failed = [c for c in bundle["checks"] if not c["pass"]]
    assert bundle["status"] == "PASS", failed
    # bundles are plain JSON once numpy scalars are encoded
    assert json.loads(_dumps(bundle))["name"] == name


def test_fixture_files_are_well_formed():
    for name in FIXTURE_NAMES:
        fx = load_fixture(name)
        assert fx["name"] == name and "inputs" in fx and fx["expectations"]


def test_compare_rules():
    assert compare({"approx": 1.0, "tol": 0.1}, 1.05)
    assert not compare({"approx": 1.0, "tol": 0.1}, None)
    assert compare({"lt": 0.1}, 0.0) and compare({"gt": 0.1}, 1.0)
    assert compare([0.0, 0.0], [0.0, 0.0]) and not compare(True, False)
    assert qkey((1, 0.5)) == "1_0.5"
