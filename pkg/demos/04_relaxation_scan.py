"""T1 and T2 against temperature for the full and projected baths, both flavors."""

import numpy as np

from spinphonon import synthetic_dataset
from spinphonon.dynamics import ScanOptions, compare_t1, relax_scan

ds = synthetic_dataset(n_modes=192, seed=1)
temps = [10, 25, 50, 100, 200, 300]

print(f"{'T (K)':>6} {'T1 quantum':>12} {'T1 classical':>13} {'T2 quantum':>12}")
q = relax_scan(ds, temps, [1.0], opts=ScanOptions(flavor="quantum"))
c = relax_scan(ds, temps, [1.0], opts=ScanOptions(flavor="classical"))
for rq, rc in zip(q, c):
    print(f"{rq.temperature:6.0f} {rq.T1:12.4e} {rc.T1:13.4e} {rq.T2:12.4e}")

rows = compare_t1(ds, temps, 1.0, ScanOptions(flavor="classical"), include_naive=True)
print("\nfull vs projected (classical):")
for r in rows:
    naive = abs(r.T1_naive / r.T1_full - 1)
    print(f"  {r.T:5.0f} K  rel. dev. projected {r.rel_dev:.1e}   naive cutoff {naive:.1e}")

ablated = compare_t1(ds, [100.0], 1.0, ScanOptions(drop_primary=(0,)))[0]
print(f"\ndropping the lowest primary mode: rel. dev. {ablated.rel_dev:.2f}")
print("T2/T1 at 300 K:", np.round(q[-1].T2 / q[-1].T1, 3))
