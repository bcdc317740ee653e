"""Independent reference computations.

Nothing here calls into the library's numerical kernels: roots come from
mpmath.polyroots, norms from numpy.linalg, integrals from brute-force
trapezoid sums, constants from closed forms in high precision.

``python tests/oracles.py --freeze`` regenerates ``goldens.json``.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import mpmath as mp
import numpy as np

GOLDEN_PATH = Path(__file__).with_name("goldens.json")
GOLDEN_ALPHA = (np.sqrt(5.0) - 1.0) / 2.0


def trig_eval(coeffs: np.ndarray, z):
    """Direct sum of ``c_k e^{2 pi i k z}`` over ``k = -d..d``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    d = (coeffs.size - 1) // 2
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for j, c in enumerate(coeffs):
        out = out + c * np.exp(2j * np.pi * (j - d) * z)
    return out


def roots_z(coeffs, mu=0.0, dps=40):
    """Zeros ``z`` of ``f - mu`` with ``Re z`` in [0, 1), via mpmath in ``w = e^{2 pi i z}``."""
    mp.mp.dps = dps
    c = [mp.mpc(complex(v)) for v in coeffs]
    d = (len(c) - 1) // 2
    c[d] -= mu
    while abs(c[0]) == 0:
        c = c[1:]
    desc = list(reversed(c))
    while abs(desc[-1]) == 0:
        desc = desc[:-1]
    ws = mp.polyroots(desc, maxsteps=400, extraprec=200)
    out = []
    for w in ws:
        z = mp.log(w) / (2j * mp.pi)
        out.append(complex(float(mp.re(z)) % 1.0, float(mp.im(z))))
    return out


def jensen_brute(coeffs, mu, y, M=2**16):
    x = np.arange(M) / M
    return float(np.mean(np.log(np.abs(trig_eval(coeffs, x + 1j * y) - mu))))


def lognorm_loop(diag, n):
    """``log ||A_{n-1} ... A_0||`` with ``A_k = [[diag[k], -1], [1, 0]]``, via numpy 2-norms."""
    P = np.eye(2, dtype=complex)
    acc = 0.0
    for k in range(n):
        P = np.array([[diag[k], -1.0], [1.0, 0.0]], dtype=complex) @ P
        s = np.linalg.norm(P, 2)
        if s > 1e50:
            P /= s
            acc += np.log(s)
    return acc + float(np.log(np.linalg.norm(P, 2)))


def matrix_lognorm_loop(mats, n):
    P = np.eye(2, dtype=complex)
    acc = 0.0
    for k in range(n):
        P = mats[k] @ P
        s = np.linalg.norm(P, 2)
        P /= s
        acc += np.log(s)
    return acc


def k_constants_mp(dps=30):
    mp.mp.dps = dps
    s5 = mp.sqrt(5)
    k = (s5 + 3) / 2
    cp = (s5 + 1) / (s5 - 1)
    a = 2 * cp - 1
    f = (a * k**4 - k**2) / (k**4 - a * k**2 + 1)
    d_minus = (cp**2 + f) / 2
    d_plus = (cp + 1) ** 2 / 2
    c1 = (k - 1) * k**2 / (k**2 - 2 * (k - 1)) + mp.log(2) / 2 * k**2
    K1 = mp.exp(-2 * mp.pi) / (2 * mp.exp(2 * mp.pi) + 2)
    return {"K1": float(K1), "d_minus": float(d_minus), "d_plus": float(d_plus), "c": float(c1)}


def amo_beta_hat(rho):
    """Smallest zero-free-part modulus for ``2 cos`` over real shifts.

    For ``mu = 2 cosh(2 pi t) > 2`` the zeros sit at heights ``+-t``.  While
    ``t < 2 rho`` they are divided out and the normalization makes ``|g|``
    huge; once ``t >= 2 rho`` nothing is divided and ``g = f - mu``, whose
    modulus on ``|Im z| <= rho`` is smallest at ``x = 0, y = rho``.  The
    infimum is reached at the switch ``t = 2 rho``.
    """
    return 2 * np.cosh(4 * np.pi * rho) - 2 * np.cosh(2 * np.pi * rho)


def random_trig(rng, max_degree=4, h=0.5):
    """Real trigonometric polynomial with standard normal coefficients; returns the coefficient vector."""
    d = int(rng.integers(1, max_degree + 1))
    a0 = rng.normal()
    a = rng.normal(size=d)
    b = rng.normal(size=d)
    c = np.zeros(2 * d + 1, dtype=complex)
    c[d] = a0
    for k in range(1, d + 1):
        c[d + k] = complex(a[k - 1], -b[k - 1]) / 2
        c[d - k] = complex(a[k - 1], b[k - 1]) / 2
    return c


def freeze():
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from qpcocycle import CocycleSpec, lyapunov_exponent, preset, theorem_constants
    from qpcocycle.asymptotics import stratum_quantities, zero_set_geometry

    amo = preset("amo")
    tc = theorem_constants(amo, 0.2)
    est = lyapunov_exponent(CocycleSpec(GOLDEN_ALPHA, 40.0, 0.0, 0.0, amo), 10_000, 256)
    est3 = lyapunov_exponent(CocycleSpec(GOLDEN_ALPHA, 40.0, 120.0, 0.0, amo), 10_000, 256)
    geo = zero_set_geometry(amo)
    geo_b = zero_set_geometry(preset("bichromatic"))
    st = stratum_quantities(amo, -1.0, 1.0)
    tc_b = theorem_constants(preset("bichromatic"), 0.2)
    goldens = {
        "_oracle": "tests/oracles.py --freeze; alpha golden mean, n=10000, M=256, rho=0.2, h=0.5",
        "amo_beta_hat_rho02": tc.beta_hat,
        "amo_C_rho02": tc.C,
        "amo_L_lam40_E0": est.value,
        "amo_L_lam40_E120": est3.value,
        "amo_R": geo.R,
        "bichromatic_R": geo_b.R,
        "bichromatic_N_rho02": tc_b.N,
        "bichromatic_beta_hat_rho02": tc_b.beta_hat,
        "amo_stratum_R0": st.R0,
        "amo_stratum_beta_hat": st.beta_hat,
        "amo_stratum_lambda_tilde0": st.lambda_tilde0,
        "amo_stratum_lambda_tilde0_corrected": st.lambda_tilde0_corrected,
    }
    GOLDEN_PATH.write_text(json.dumps(goldens, indent=2) + "\n")
    return goldens


def load_goldens() -> dict:
    return json.loads(GOLDEN_PATH.read_text())


if __name__ == "__main__":
    if "--freeze" in sys.argv:
        print(json.dumps(freeze(), indent=2))
