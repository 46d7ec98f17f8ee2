"""Function-space descriptors for H^2(B_N) and the weighted Bergman spaces A^2_s(B_N)."""

from __future__ import annotations

from dataclasses import dataclass, field

HARDY_S = -1.0


@dataclass(frozen=True)
class SpaceSpec:
    """Dimension ``n`` and weight ``s``; ``s == -1`` encodes the Hardy space.

    The reproducing kernel is ``K_z(w) = (1 - <w, z>)^(-beta_exp)`` with
    ``beta_exp = n`` for Hardy and ``n + s + 1`` otherwise (the two agree at
    ``s = -1``).
    """

    n: int
    s: float = HARDY_S
    beta_exp: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n!r}")
        if self.s < HARDY_S:
            raise ValueError(f"weight parameter must satisfy s >= -1, got {self.s!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", float(self.s))
        beta = float(self.n) if self.is_hardy else self.n + self.s + 1.0
        object.__setattr__(self, "beta_exp", beta)

    @property
    def is_hardy(self) -> bool:
        return self.s == HARDY_S

    @classmethod
    def hardy(cls, n: int) -> "SpaceSpec":
        return cls(n, HARDY_S)

    @classmethod
    def bergman(cls, n: int, s: float) -> "SpaceSpec":
        if s <= HARDY_S:
            raise ValueError("Bergman weight must satisfy s > -1")
        return cls(n, s)

    def label(self) -> str:
        return "hardy" if self.is_hardy else f"bergman:{self.s:g}"
