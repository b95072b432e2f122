"""Smoke test for the pychaoslab extension.

Build and install first:  pip install --no-build-isolation -e crates/chaoslab-py
"""

import json
import math
import os
import tempfile

import pychaoslab as cl


def main():
    os.environ.setdefault("CHAOSLAB_CACHE_DIR", tempfile.mkdtemp(prefix="chaoslab-cache-"))

    g = cl.Density.gaussian()
    assert abs(g.entropy() + 0.5 * math.log(2 * math.pi * math.e)) < 1e-6
    assert abs(g.fisher() - 1.0) < 1e-6
    assert len(g.sample(5, 1)) == 5 and g.sample(5, 1) == g.sample(5, 1)

    assert abs(cl.w1_line([0.0], [0.3]) - 0.3) < 1e-12
    assert abs(cl.w1_line([0.0], [5.0]) - 1.0) < 1e-12
    cost, perm = cl.w1_config([0.0, 2.0], [2.1, 0.1])
    assert perm == [1, 0] and abs(cost - 0.1) < 1e-12
    assert cl.hs_dist_sq([0.0, 1.0], [0.0, 1.0]) < 1e-12

    n = 64
    assert cl.sigma_marginal_l1(n) <= 8 / (n - 4)
    value, stderr = cl.omega_n_sphere(n, mc_reps=50)
    assert 0.0 < value < 0.2 and stderr >= 0.0

    table = cl.PartitionTable(cl.Density.bimodal(), 128)
    assert table.max_n == 128
    assert table.marginal_l1(64) < table.marginal_l1(32)
    assert table.entropy_gap(64) >= 0.0

    pi = cl.Mixture([(0.5, g.shifted(-3.0)), (0.5, g.shifted(3.0))])
    assert abs(pi.level3_entropy() - g.entropy()) < 1e-9

    names = [name for name, _, _ in cl.list_experiments()]
    assert len(names) == 9 and "poincare-rate" in names
    out = os.path.join(tempfile.mkdtemp(), "poincare")
    summary = json.loads(cl.run_experiment("poincare-rate", f'mc_reps = 60\noutput = "{out}"'))
    assert summary["config"]["mc_reps"] == 60 and summary["criterion"] == 3
    print("poincare-rate passed:", summary["passed"])

    try:
        cl.run_experiment("no-such-experiment")
    except KeyError:
        pass
    else:
        raise AssertionError("unknown experiment must raise KeyError")

    print("pychaoslab smoke test OK")


if __name__ == "__main__":
    main()
