"""Supernatural numbers: rank-one subgroups of Q and the ECRS dichotomy.

A noncyclic subgroup U of the rationals is described up to isomorphism by a
supernatural number: a prime -> multiplicity map where multiplicities may be
infinite.  Infinite multiplicities are carried as an explicit prime set, so
genuinely infinite objects are represented by finite data; arbitrary infinite
supports with finite multiplicities are approximated by prefixes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import SchemaError

INFINITE = "infinite"  # sentinel for infinite rank / index values


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division (inputs here are modest)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class SupernaturalNumber:
    """finite_part: prime -> positive multiplicity; infinite_primes: multiplicity oo."""

    finite_part: dict[int, int] = field(default_factory=dict)
    infinite_primes: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "finite_part", dict(self.finite_part))
        object.__setattr__(self, "infinite_primes", frozenset(self.infinite_primes))
        overlap = set(self.finite_part) & self.infinite_primes
        if overlap:
            raise SchemaError(f"primes {sorted(overlap)} both finite and infinite")
        for p, e in self.finite_part.items():
            if e <= 0:
                raise SchemaError(f"multiplicity of {p} must be positive, got {e}")

    def multiplicity(self, p: int):
        if p in self.infinite_primes:
            return INFINITE
        return self.finite_part.get(p, 0)

    def divides(self, x: Fraction) -> bool:
        """Whether x lies in the subgroup of Q with this supernatural number,
        i.e. the denominator of x fits under the multiplicities."""
        for p, e in factorize(x.denominator).items():
            m = self.multiplicity(p)
            if m != INFINITE and e > m:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "finite": {str(p): e for p, e in sorted(self.finite_part.items())},
            "infinite": sorted(self.infinite_primes),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SupernaturalNumber":
        try:
            finite = {int(p): int(e) for p, e in obj.get("finite", {}).items()}
            infinite = frozenset(int(p) for p in obj.get("infinite", []))
        except (TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(f"bad supernatural number: {exc}") from None
        return cls(finite, infinite)


@dataclass(frozen=True)
class FactorSequence:
    """Ordered finite prefix p_2, p_3, ... of telescoped factors, each > 1."""

    factors: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(int(p) for p in self.factors))
        if any(p <= 1 for p in self.factors):
            raise SchemaError("every factor must exceed 1")

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


def from_factors(seq: FactorSequence | Sequence[int]) -> SupernaturalNumber:
    """Supernatural number of the product of a finite factor prefix."""
    factors = list(seq.factors if isinstance(seq, FactorSequence) else seq)
    if not factors:
        raise SchemaError("empty factor sequence")
    acc: dict[int, int] = {}
    for p in factors:
        for q, e in factorize(p).items():
            acc[q] = acc.get(q, 0) + e
    return SupernaturalNumber(acc)


def is_p_divisible(u: SupernaturalNumber, p: int) -> bool:
    return p in u.infinite_primes


def quotient_order(u: SupernaturalNumber, l: int) -> int:
    """|U/lU|: primes of l with finite multiplicity in U contribute fully,
    infinite-multiplicity primes contribute 1 (multiplication by them is an
    automorphism of U)."""
    if l < 1:
        raise ValueError("l must be >= 1")
    out = 1
    for p, e in factorize(l).items():
        if p not in u.infinite_primes:
            out *= p ** e
    return out


def quotient_order_bruteforce(u: SupernaturalNumber, l: int) -> int:
    """Independent oracle for |U/lU|.

    U/lU is cyclic, generated by the class of a deep-level generator
    g = 1/(finite part * infinite-prime-prefix); once the prefix depth
    exceeds every p-adic valuation of l the quotient stabilizes, and the
    order of [g] is the least n > 0 with n*g in lU.  Membership in lU is
    decided purely from the definition: x in lU iff x/l has denominator
    dividing the supernatural number.
    """
    fin = 1
    for p, e in u.finite_part.items():
        fin *= p ** e
    inf = 1
    for p in u.infinite_primes:
        inf *= p
    depth = l.bit_length() + 2   # deeper than any v_p(l)
    g = Fraction(1, fin * inf ** depth)
    for n in range(1, l + 1):
        if u.divides(n * g / l):
            return n
    return l


def _ge(a, b) -> bool:
    """a >= b where either side may be the INFINITE sentinel."""
    if a == INFINITE:
        return True
    if b == INFINITE:
        return False
    return a >= b


@dataclass(frozen=True)
class EcrsDecision:
    exists: bool
    size: int | str | None   # exact size, INFINITE for unbounded, None if unknown/absent
    bounded: bool | None
    reason: str

    def to_json(self) -> dict:
        return {
            "exists": self.exists,
            "size": self.size if not isinstance(self.size, int) else str(self.size),
            "bounded": self.bounded,
            "reason": self.reason,
        }


def decide_ecrs(rank_g: int | str, u: SupernaturalNumber,
                lam: int | str) -> EcrsDecision:
    """The ECRS existence dichotomy for (G, H) with tau(G) of supernatural
    number u, lam = |tau(G)/tau(H)| and rank_g = rank G (INFINITE allowed).

    With an infinite-multiplicity prime present, a realization always exists
    and can be made bounded exactly when lam is finite.  Without one, a
    realization exists iff rank G <= lam, and every bounded one has size lam.
    """
    if rank_g != INFINITE and int(rank_g) < 1:
        raise ValueError("rank must be >= 1")
    if u.infinite_primes:
        if lam == INFINITE:
            return EcrsDecision(True, INFINITE, False, "p-divisible-unbounded")
        return EcrsDecision(True, None, True, "p-divisible-bounded")
    if not _ge(lam, rank_g):
        return EcrsDecision(False, None, None, "rank-exceeds-index")
    if lam == INFINITE:
        return EcrsDecision(True, INFINITE, False, "index-infinite-unbounded")
    return EcrsDecision(True, int(lam), True, "size-equals-index")
