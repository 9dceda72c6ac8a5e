"""Acceptance gate: every criterion at its stated tolerance, one line each."""

import pytest

from adiabatic_lab import acceptance, cli

from conftest import ACCEPTANCE_LINES


def _record(cid, passed, title, measured):
    mark = "PASS" if passed else "FAIL"
    shown = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in list(measured.items())[:4])
    line = f"[{mark}] criterion {cid:>2}: {title} ({shown})"
    ACCEPTANCE_LINES.append((cid, line))
    print(line)


@pytest.mark.parametrize("fn", acceptance.CRITERIA, ids=lambda fn: fn.__name__)
def test_criterion(fn):
    c = fn()
    _record(c.id, c.passed, c.title, c.measured)
    assert c.passed, c.measured


def test_criterion_12_repro_deterministic(tmp_path):
    outs = []
    for tag in ("first", "second"):
        out = tmp_path / tag
        code = cli.main(["repro", "--out", str(out), "--quiet"])
        assert code == cli.EXIT_OK
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "meta.json"})
    same = outs[0] == outs[1] and set(outs[0]) == {"acceptance.csv", "acceptance.json"}
    _record(12, same, "repro run twice yields byte-identical data files", {"files": len(outs[0])})
    assert same
