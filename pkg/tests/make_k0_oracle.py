"""Regenerate tests/data/k0_oracle.json: 200 reference points for K0 computed
with 50-digit arithmetic.  Run from the repository root:

    python tests/make_k0_oracle.py
"""

import json
from pathlib import Path

import mpmath as mp
import numpy as np

SWITCH = 19.0


def main():
    rng = np.random.default_rng(20240817)
    pts = []
    # both regimes, log-spaced radii
    for _ in range(120):
        r = np.exp(rng.uniform(np.log(1e-3), np.log(60.0)))
        th = rng.uniform(-0.98 * np.pi, 0.98 * np.pi)
        pts.append(r * np.exp(1j * th))
    # the positive real axis, where K0 is smallest relative to its sums
    for _ in range(40):
        pts.append(complex(np.exp(rng.uniform(np.log(1e-3), np.log(60.0)))))
    # the seam ring
    for th in np.linspace(-0.97 * np.pi, 0.97 * np.pi, 40):
        pts.append(SWITCH * np.exp(1j * th))

    rows = []
    with mp.workdps(50):
        for z in pts:
            ref = mp.besselk(0, mp.mpc(z))
            rows.append([float(z.real), float(z.imag),
                         float(ref.real), float(ref.imag)])
    out = Path(__file__).parent / "data" / "k0_oracle.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(rows, indent=1) + "\n")
    print(f"wrote {len(rows)} points to {out}")


if __name__ == "__main__":
    main()
