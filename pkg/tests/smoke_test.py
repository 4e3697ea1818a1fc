"""Quick smoke test — runs one check from each engine layer."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import numpy as np

from src.calculus.rules import get_rule, verify_rule
from src.gaussian.tensors import contract_check
from src.bosonization.images import check_dense
from src.bosonization.lattice import Lattice
from src.codes.gadgets import gate_identities

# Rule catalog
for name in ["parity-squared", "z-fusion", "odd-dot-sign"]:
    record = verify_rule(get_rule(name))
    print(f"[OK] Rule[{name}]: pass={record.passed}, max_dev={record.max_dev:.2e}")

# Gaussian contraction
rng = np.random.default_rng(0)
m = rng.normal(size=(6, 6))
report = contract_check(m - m.T, [(0, 3), (4, 1)])
print(f"[OK] Gaussian contraction: equal={report.equal}, max_dev={report.max_dev:.2e}")

# Bosonization
lattice = Lattice((2, 2))
dense = check_dense(lattice)
print(f"[OK] Bosonization {lattice.describe()}: {dense.checked} checks, passed={dense.passed}")

# Code gadgets
for check in gate_identities():
    print(f"[OK] Gadget[{check.name}]: pass={check.passed}, max_dev={check.max_dev:.2e}")

print("\n[DONE] Smoke test complete")
