"""Smoke test for the qsearch_py extension module."""

import json
import math

import qsearch_py as qs


def main():
    h = qs.gate_matrix("H")
    assert abs(h[0][0] - 1 / math.sqrt(2)) < 1e-12
    assert qs.is_unitary("RX", 0.3)

    sv = qs.Statevector.basis(2, "10")
    sv.apply_gate("CNOT", [0, 1])
    assert abs(sv.probabilities()["11"] - 1.0) < 1e-12

    probs = qs.grover_probabilities(["111"], 3, 1)
    assert abs(probs["111"] - 25 / 32) < 1e-12
    assert qs.filter(probs) == ["111"]
    assert [qs.optimal_invocations(n, m) for n, m in [(256, 5), (1024, 15), (4096, 20)]] == [5, 6, 11]

    items, targets = qs.preset_dataset("exp1")
    trace = qs.search("resaqus", items, targets)
    assert trace["cqc"] == 12 and trace["accuracy"] == 1.0
    assert [r["qubits"] for r in trace["iterations"]] == [8, 4]

    try:
        qs.search("iqucs", items, targets, threshold_multiplier=50.0)
        raise AssertionError("expected EmptyResultError")
    except qs.EmptyResultError as e:
        partial = json.loads(e.args[2])
        assert len(partial["iterations"]) == 1

    report = qs.cluster("resaqus")["report"]
    assert report["total_active_slots"] == 24

    print("smoke test ok")


if __name__ == "__main__":
    main()
