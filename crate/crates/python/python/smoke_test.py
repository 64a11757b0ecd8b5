"""Smoke test for the cyclat_py extension.

Run after `cargo build -p cyclat-py --release` (or `maturin develop`):

    python3 crates/python/python/smoke_test.py
"""

import importlib.machinery
import importlib.util
import pathlib
import sys


def load():
    try:
        import cyclat_py

        return cyclat_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parents[3]
    for profile in ("release", "debug"):
        for name in ("libcyclat_py.so", "libcyclat_py.dylib", "cyclat_py.dll"):
            path = root / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("cyclat_py", str(path))
                spec = importlib.util.spec_from_file_location("cyclat_py", path, loader=loader)
                mod = importlib.util.module_from_spec(spec)
                loader.exec_module(mod)
                return mod
    sys.exit("cyclat_py not built; run cargo build -p cyclat-py --release")


def main():
    c = load()

    ids = c.ring_identities(3)
    assert ids["h"] == [0, -1], ids

    m = c.Module("cyclicR(2,1)", p=2)
    assert m.order() == 4
    assert m.presentation_rank() == 4
    assert m.is_noncyclotomic()
    basis = m.invariant_basis()
    assert basis["k"] == 0 and len(basis["orbits"]) == 1 and len(basis["fixed"]) == 2

    r4 = c.Module("cyclicR(2,2)", p=2)
    inc = c.Inclusion(r4, sub="t")
    assert not inc.t_condition()
    assert inc.impurity_witness() is not None
    assert not inc.has_equivariant_projection()
    assert c.Inclusion(r4, sub="all").t_condition()

    g = c.Graph.realization(c.Module("cyclic(5,4)", p=2))
    assert g.k_theory() == ("Z/5", 0)
    assert g.verify() == []
    assert g.is_stable()

    s = c.Graph.strand(4, cycled_from=1)
    assert s.k_theory() == ("0", 3)
    assert len(s.k1_action()) == 3

    assert c.cokernel([[2, 0], [0, 3]]) == ([6], 0)
    print("cyclat_py smoke test passed")


if __name__ == "__main__":
    main()
