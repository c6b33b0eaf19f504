"""Smoke test for the `aus` extension module.

Uses an installed `aus` if importable, otherwise loads the library built by
`cargo build -p aus-py` (set AUS_LIB to point at it explicitly).
"""

import importlib.util
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_aus():
    try:
        import aus

        return aus
    except ImportError:
        pass
    candidates = [os.environ.get("AUS_LIB")] if os.environ.get("AUS_LIB") else []
    for profile in ("release", "debug"):
        for name in ("libaus.so", "libaus.dylib", "aus.dll"):
            candidates.append(str(ROOT / "target" / profile / name))
    for c in candidates:
        if c and Path(c).exists():
            tmp = Path(tempfile.mkdtemp())
            target = tmp / ("aus.pyd" if c.endswith(".dll") else "aus.so")
            shutil.copy(c, target)
            spec = importlib.util.spec_from_file_location("aus", target)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    sys.exit("aus extension not found; run `cargo build -p aus-py` first")


def main():
    aus = load_aus()
    print("aus", aus.__version__)

    assert abs(aus.compute_delta_m("circle", 0.3, []) - 0.1) < 1e-15
    assert abs(aus.compute_delta_m("su2", 3.0, ["j=1"]) - 0.06415) < 1e-5
    assert len(aus.irreps("su2", 2)) == 5

    tree = aus.Tree("circle", 4)
    assert tree.boundaries(1) == [0.0, 0.5, 1.0]
    assert tree.omega_measure(2) >= 0.75

    bundle = aus.construct("circle", [0.5, 0.25, 0.125], k_cap=8)
    assert len(bundle) == 3 and not bundle.partial
    for line in bundle.summary():
        print(" ", line)
    seen = set()
    for rec in bundle:
        support = set(rec.support)
        assert not support & seen
        seen |= support
        re, im = rec([0.1])
        assert abs(complex(re, im)) < 1 + bundle.epsilons[rec.m - 1]

    report = aus.verify(bundle, random_points=1000)
    assert report.passed, report.failed_checks
    print(" ", report)

    again = aus.Bundle.from_json(bundle.to_json())
    assert again.to_json() == bundle.to_json()
    assert json.loads(bundle.to_json())["version"] == aus.BUNDLE_VERSION

    partial = aus.construct("circle", [0.5, 0.001], band_cap=16, allow_partial=True)
    assert partial.partial and len(partial) == 1
    try:
        aus.construct("circle", [0.5, 0.001], band_cap=16)
        raise AssertionError("cap error not raised")
    except RuntimeError as e:
        print("  cap error:", e)
    try:
        aus.construct("cyclic:4", [0.5])
        raise AssertionError("bad group accepted")
    except ValueError:
        pass

    rows = bundle.profile(0)
    assert len(rows) == 2048
    print("smoke test passed")


if __name__ == "__main__":
    main()
