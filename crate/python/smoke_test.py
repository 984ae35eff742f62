"""Smoke test for the Python bindings.

Uses an installed `padic_tree_py` if there is one; otherwise builds the
cdylib with cargo and loads it from target/.
"""

import importlib.machinery
import importlib.util
import json
import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import padic_tree_py

        return padic_tree_py
    except ImportError:
        pass
    subprocess.run(["cargo", "build", "-q", "-p", "padic-tree-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "debug" / "libpadic_tree_py.so"
    loader = importlib.machinery.ExtensionFileLoader("padic_tree_py", str(lib))
    spec = importlib.util.spec_from_file_location("padic_tree_py", lib, loader=loader)
    mod = importlib.util.module_from_spec(spec)
    loader.exec_module(mod)
    return mod


def main():
    m = load()
    p, f, n, d = 3, 1, 12, 8

    nb = m.neighbors(p, f, n, "V(0;0)")
    assert len(nb) == p + 1, nb
    assert all(m.distance(p, f, n, "V(0;0)", v) == 1 for v in nb)

    assert m.reduce(p, f, n, "p^{0} * (g) mod p^12") == "V(0;0)"

    # log(1 + p) has valuation 1
    assert m.iwasawa_log(p, f, n, "p^{0} * (4) mod p^12").startswith("p^{1}")

    div = [(1, "p^{0} * (g) mod p^12"), (-1, "p^{2} * (2 + g) mod p^14")]
    x = json.loads(m.integrate_tate(p, f, n, d, div))
    assert x, x

    pkg = (ROOT / "data" / "tate_group.json").read_text()
    q = m.periods(pkg, n, d)
    assert len(q) == 1 and q[0][0].startswith("p^{2}"), q
    lin = m.linvariant(pkg, n, d)
    assert len(lin) == 1

    alpha, residual = m.lift(pkg, [1, 1], n, d)
    assert m.normalize(p, f, n, alpha[0]) == m.normalize(p, f, n, "p^{0} * (1) mod p^12"), alpha
    assert residual >= 6, residual

    try:
        m.neighbors(p, f, n, "nonsense")
    except ValueError:
        pass
    else:
        raise AssertionError("bad vertex accepted")

    print("smoke test ok")


if __name__ == "__main__":
    sys.exit(main())
