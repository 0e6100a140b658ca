"""Principal g-values of the vanadyl phthalocyanine g-tensor and its Zeeman splitting."""

import numpy as np

from spinphonon import VOPC_G_TENSOR, SpinSystem, principal_frame, spin_hamiltonian

values, R = principal_frame(VOPC_G_TENSOR)
print("principal g-values:", np.round(values, 5))
print("rotation into the principal frame:\n", np.round(R, 4))

for axis, B in zip("xyz", np.eye(3)):
    E = np.linalg.eigvalsh(spin_hamiltonian(SpinSystem(0.5, VOPC_G_TENSOR, B)))
    print(f"1 T along {axis}: splitting {E[1] - E[0]:.6f} cm^-1")
