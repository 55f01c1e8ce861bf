"""Smoke test for the cpbench_py extension.

Build first with `cargo build -p cpbench-py` (or `--release`). The script
imports an installed `cpbench_py` if there is one, otherwise it loads the
shared library straight from target/.
"""

import importlib
import random
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        return importlib.import_module("cpbench_py")
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libcpbench_py.so"
        if lib.exists():
            tmp = Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "cpbench_py.so")
            sys.path.insert(0, str(tmp))
            return importlib.import_module("cpbench_py")
    sys.exit("cpbench_py not found; run `cargo build -p cpbench-py` first")


def main():
    cb = load()
    print("cpbench_py", cb.__version__)

    # two clusters of seven coefficients fit in m = 60
    sim = cb.simulate(rho=0.0, rep=0, seed=7, n=150, m=60)
    assert len(sim["x"]) == 150 and len(sim["x"][0]) == 60
    assert len(sim["support"]) == 14, sim["support"]
    assert sim == cb.simulate(rho=0.0, rep=0, seed=7, n=150, m=60), "simulation is not reproducible"

    fit = cb.fit(sim["x"], sim["y"], iterations=300, burn_in=100, seed=3)
    for name in ("lars", "step", "svs"):
        f = fit[name]
        assert 0 <= f["k"] <= 60
        assert len(f["selected"]) == f["k"]
        assert min(f["cp"]) == f["cp_min"]
        # full-model Cp equals the number of covariates
        if name != "svs":
            assert abs(f["cp"][-1] - 60) < 1e-8, f["cp"][-1]
    assert sorted(fit["ranking"]) == list(range(60))
    assert all(0.0 <= p <= 1.0 for p in fit["inclusion"])
    truth = set(sim["support"])
    hits = len(truth & set(fit["lars"]["selected"]))
    print(f"LARS k={fit['lars']['k']} ({hits} true), Step k={fit['step']['k']}, svsCp k={fit['svs']['k']}")

    # default design: 15 clusters of 7 centred at 25, 50, ..., 375 (1-based)
    default_support = [c + d - 1 for c in range(25, 401, 25) if c + 3 <= 400 for d in range(-3, 4)]
    c = cb.confusion(list(range(400)), default_support, 400)
    assert (c["total_miss"], c["fdr"], c["fnr"]) == (295, 0.7375, 0.0), c

    rng = random.Random(11)
    for _ in range(50):
        m = rng.randint(5, 40)
        k0 = rng.randint(1, m - 1)
        k = rng.randint(k0 + 1, m)
        y = [rng.gauss(0, 1) + (rng.uniform(2, 5) if i < k0 else 0.0) for i in range(m)]
        g = cb.cp_gap(y, k0, k)
        assert g["gap"] <= g["bound"] + 1e-9, g
        assert g["b_k"] == k0 and not g["tied"], g

    o = cb.overfit(reps=10, seed=5)
    assert o["k0"] == 105 and o["p_overfit"] > 0.5, o
    print(f"overfit: P(k_hat > k0) = {o['p_overfit']}")

    try:
        cb.confusion([5], [1], 3)
    except ValueError as e:
        print("bad input rejected:", e)
    else:
        raise AssertionError("out-of-range index accepted")
    print("ok")


if __name__ == "__main__":
    main()
