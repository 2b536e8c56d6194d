"""Shared test utilities."""

import math

from sparareal.bounds import BoundConstants


def constants_from_targets(A: float, B: float, Lam: float, D: float,
                           e1_hat: float = 1.0, dt: float = 0.25,
                           L_F: float = 1.0) -> BoundConstants:
    """Invert the constant formulas so the derived A, B, Lam, D hit targets.

    Lets property tests exercise the bound evaluators with arbitrary positive
    recursion coefficients while still going through the real dataclass.
    """
    if A <= 0.0:
        raise ValueError("need A > 0 to place D = A * e0_hat")
    factor = 2.0 + 1.0 / dt
    C1 = math.sqrt(A / (dt ** 4 * factor))
    L_G = math.sqrt(B / (1.0 + 2.0 * dt))
    C2 = math.sqrt(Lam / (dt * factor))
    return BoundConstants(C1=C1, C2=C2, L_G=L_G, L_F=L_F, dt=dt,
                          e0_hat=D / A, e1_hat=e1_hat, p=1, q=0.0)
