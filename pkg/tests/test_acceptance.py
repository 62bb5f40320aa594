"""End-to-end acceptance criteria.

Each test runs one named experiment through the batch harness at the
default tolerance profile and prints a single PASS/FAIL line for the
criterion it certifies.
"""
import numpy as np
import pytest

from wedgelab import cli

_CACHE = {}


def _run(name):
    if name not in _CACHE:
        body, _ = cli.run_experiment(name, {"schema_version": 1}, 0,
                                     "default", 1)
        _CACHE[name] = body
    return _CACHE[name]


def _report(criterion, body, names):
    checks = [c for c in body["checks"] if any(c["name"].startswith(n)
                                               for n in names)]
    assert checks, f"no checks matched {names}"
    ok = all(c.get("passed", True) for c in checks)
    vals = [abs(c["value"]) for c in checks if isinstance(c["value"], float)]
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: "
          f"{len(checks)} checks, worst value {max(vals):.3e}")
    assert ok, f"{criterion}: " + "; ".join(
        f"{c['name']}={c['value']:.3e}" for c in checks
        if not c.get("passed", True))


def test_criterion_car_identities():
    body = _run("verify-car")
    _report("canonical anticommutation identities (tol 1e-10)", body, ["car["])


def test_criterion_wave_equation_kernel():
    body = _run("verify-car")
    _report("wave-equation images restrict to zero (tol 1e-12)", body,
            ["wave-equation["])


def test_criterion_pfaffian_oracle_words():
    body = _run("oracle-crosscheck")
    assert body["checks"][0]["words"] == 5461  # all words of length <= 6
    _report("vacuum words match the pairing oracle (tol 1e-9)", body,
            ["pfaffian-vs-matrix"])


def test_criterion_relative_locality():
    body = _run("relative-locality")
    _report("twisted commutator identity and spacelike scalar "
            "(tol 1e-10 / 1e-5)", body, ["identity[", "scalar[spacelike"])


def test_criterion_nonlocality_witness():
    body = _run("nonlocality-witness")
    _report("central-sequence witness: zero meets, monotone rise to >= 0.99, "
            "overlap within 0.05 of -i", body,
            ["meet-rank", "witness", "overlap-defect"])
    wit = body["plot_data"]["witness"]
    assert len(wit) == 16 and wit[-1]["witness"] >= 0.99


def test_criterion_weak_locality():
    body = _run("weak-locality")
    _report("vacuum weak locality for opposite wedges (tol 1e-6) "
            "with same-wedge control > 1e-3", body,
            ["wedge-separated", "matrix-vs-pfaffian", "same-wedge-control"])


def test_criterion_wedge_modular_conjugation():
    body = _run("bisognano-wichmann")
    _report("reflected continuation matches the conjugate profile for 5 "
            "bumps (tol 1e-4), refinement gain >= 4x", body,
            ["tomita[", "refinement-ratio"])


def test_criterion_string_localization():
    body = _run("string-fields")
    _report("string fields: half-line support and opposite-wedge "
            "anticommutation (tol 1e-5), nontrivial norm > 0.1", body,
            ["k-vanishes", "dual-vanishes", "anticommutator[", "field-norm"])


def test_criterion_local_net():
    body = _run("local-net")
    _report("double-cone net: even elements commute across spacelike "
            "separation, 3 nested + 3 spacelike pairs (tol 1e-5)", body,
            ["even-degree-2", "scan:nested", "scan:spacelike"])
