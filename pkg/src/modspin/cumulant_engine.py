"""Exact joint-cumulant combinatorics for the zero-field Ising chain.

Everything here is exact arithmetic over the variable ``x = tanh(beta)``:
big-rational polynomials and rational functions, the bijections between
pairings, labelled Dyck paths and labelled planar rooted trees, the tree
functionals ``N`` and ``F``, the closed joint-cumulant polynomial, and the
composition/contraction calculus that turns elementary cumulants into
magnetization-cumulant estimates and bounds.

Floating point appears only at the evaluation boundary (plugging in a
numeric ``x``) and in :func:`pmf_cumulants`, the verification oracle that
extracts cumulants from an exact lattice pmf.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Iterator, Sequence

import numpy as np

from .spin_models import LatticePmf

__all__ = [
    "ExactPoly",
    "ExactRat",
    "DyckPath",
    "LabelledDyckPath",
    "Pairing",
    "LabelledTree",
    "Composition",
    "enumerate_dyck",
    "enumerate_dyck_star",
    "enumerate_pairings",
    "even_set_partitions",
    "pairing_to_labelled_dyck",
    "labelled_dyck_to_pairing",
    "dyck_to_tree",
    "tree_to_dyck",
    "noncrossing_pairing",
    "functional_N",
    "functional_F",
    "functional_F_moebius",
    "joint_cumulant_spins",
    "moebius_joint_cumulant",
    "contract_diagram",
    "functional_B",
    "magnetization_cumulant_estimate",
    "magnetization_cumulant_exact",
    "polynomial_P",
    "q_value",
    "q_value_tree_form",
    "cumulant_bound",
    "pmf_cumulants",
    "CancellationWarning",
]

DYCK_CAP = 8          # enumerate_dyck cap on r
JOINT_CAP = 16        # joint_cumulant_spins cap on 2r
ESTIMATE_CAP = 6      # magnetization_cumulant_estimate cap on r
Q_CAP = 10
MOEBIUS_CAP = 8       # even-set-partition oracle cap on 2r


# ---------------------------------------------------------------------------
# exact polynomials and rational functions in x


class ExactPoly:
    """Sparse polynomial in x with Fraction coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, Fraction] | None = None) -> None:
        clean: dict[int, Fraction] = {}
        for e, c in (coeffs or {}).items():
            frac = Fraction(c)
            if frac != 0:
                if e < 0:
                    raise ValueError("exponents must be non-negative")
                clean[int(e)] = frac
        self.coeffs = clean

    @classmethod
    def zero(cls) -> "ExactPoly":
        return cls()

    @classmethod
    def const(cls, c) -> "ExactPoly":
        return cls({0: Fraction(c)})

    @classmethod
    def x_power(cls, e: int, c=1) -> "ExactPoly":
        return cls({e: Fraction(c)})

    @classmethod
    def one_minus_x_pow(cls, k: int) -> "ExactPoly":
        """The factor 1 - x^k."""
        return cls({0: Fraction(1), k: Fraction(-1)})

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return max(self.coeffs) if self.coeffs else -1

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.coeffs.items())))

    def __add__(self, other: "ExactPoly") -> "ExactPoly":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, Fraction(0)) + c
        return ExactPoly(out)

    def __neg__(self) -> "ExactPoly":
        return ExactPoly({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: "ExactPoly") -> "ExactPoly":
        return self + (-other)

    def __mul__(self, other) -> "ExactPoly":
        if isinstance(other, ExactPoly):
            out: dict[int, Fraction] = {}
            for e1, c1 in self.coeffs.items():
                for e2, c2 in other.coeffs.items():
                    e = e1 + e2
                    out[e] = out.get(e, Fraction(0)) + c1 * c2
            return ExactPoly(out)
        return ExactPoly({e: c * Fraction(other)
                          for e, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ExactPoly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = ExactPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, x):
        """Evaluate term by term; exact when x is a Fraction or int."""
        if not self.coeffs:
            return 0.0 if isinstance(x, float) else Fraction(0)
        acc = 0.0 if isinstance(x, float) else Fraction(0)
        for e, c in sorted(self.coeffs.items()):
            acc = acc + (float(c) if isinstance(x, float) else c) * x ** e
        return acc

    def divmod(self, other: "ExactPoly") -> tuple["ExactPoly", "ExactPoly"]:
        """Exact polynomial long division."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = dict(self.coeffs)
        quo: dict[int, Fraction] = {}
        d_deg = other.degree
        d_lead = other.coeffs[d_deg]
        while rem and max(rem) >= d_deg:
            e = max(rem)
            factor = rem[e] / d_lead
            quo[e - d_deg] = factor
            for de, dc in other.coeffs.items():
                t = e - d_deg + de
                rem[t] = rem.get(t, Fraction(0)) - factor * dc
                if rem[t] == 0:
                    del rem[t]
        return ExactPoly(quo), ExactPoly(rem)

    def to_text(self) -> str:
        """Canonical text form 'c0 + c1*x^e1 + ...', ascending exponents."""
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            if e == 0:
                parts.append(str(c))
            elif e == 1:
                parts.append(f"{c}*x")
            else:
                parts.append(f"{c}*x^{e}")
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {"terms": [{"exponent": str(e),
                           "numerator": str(c.numerator),
                           "denominator": str(c.denominator)}
                          for e, c in sorted(self.coeffs.items())]}

    def __repr__(self) -> str:
        return f"ExactPoly({self.to_text()})"


class ExactRat:
    """Rational function num / prod_k (1 - x^k)^mult, factors kept unreduced.

    The factored denominator matches the shapes the composition calculus
    produces; :meth:`reduced` cancels common polynomial content explicitly.
    """

    __slots__ = ("num", "den_factors")

    def __init__(self, num: ExactPoly,
                 den_factors: dict[int, int] | None = None) -> None:
        self.num = num
        clean = {int(k): int(m) for k, m in (den_factors or {}).items()
                 if m != 0}
        if any(k < 1 or m < 0 for k, m in clean.items()):
            raise ValueError("denominator factors need k >= 1, mult >= 0")
        self.den_factors = clean

    @classmethod
    def from_poly(cls, p: ExactPoly) -> "ExactRat":
        return cls(p, {})

    @classmethod
    def one(cls) -> "ExactRat":
        return cls(ExactPoly.const(1), {})

    @classmethod
    def geometric_factor(cls, k: int) -> "ExactRat":
        """x^k / (1 - x^k)."""
        return cls(ExactPoly.x_power(k), {k: 1})

    def den_poly(self) -> ExactPoly:
        p = ExactPoly.const(1)
        for k, m in sorted(self.den_factors.items()):
            p = p * ExactPoly.one_minus_x_pow(k) ** m
        return p

    def __mul__(self, other) -> "ExactRat":
        if isinstance(other, ExactRat):
            fac = Counter(self.den_factors)
            fac.update(other.den_factors)
            return ExactRat(self.num * other.num, dict(fac))
        return ExactRat(self.num * other, dict(self.den_factors))

    __rmul__ = __mul__

    def __add__(self, other: "ExactRat") -> "ExactRat":
        common = {k: max(self.den_factors.get(k, 0),
                         other.den_factors.get(k, 0))
                  for k in set(self.den_factors) | set(other.den_factors)}
        def scaled(r: "ExactRat") -> ExactPoly:
            p = r.num
            for k, m in common.items():
                extra = m - r.den_factors.get(k, 0)
                if extra:
                    p = p * ExactPoly.one_minus_x_pow(k) ** extra
            return p
        return ExactRat(scaled(self) + scaled(other), common)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactRat):
            return NotImplemented
        return (self.num * other.den_poly()) == (other.num * self.den_poly())

    def __call__(self, x):
        num = self.num(x)
        den = 1 if not isinstance(x, float) else 1.0
        for k, m in self.den_factors.items():
            den = den * (1 - x ** k) ** m
        return num / den

    def reduced(self) -> tuple[ExactPoly, ExactPoly]:
        """(numerator, denominator) with common polynomial content removed
        and a monic denominator."""
        num, den = self.num, self.den_poly()
        g = _poly_gcd(num, den)
        if g.degree > 0:
            num, _ = num.divmod(g)
            den, _ = den.divmod(g)
        lead = den.coeffs.get(den.degree, Fraction(1))
        if lead != 1:
            inv = 1 / lead
            num, den = num * inv, den * inv
        return num, den

    def to_text(self) -> str:
        if not self.den_factors:
            return self.num.to_text()
        fac = " * ".join(
            f"(1 - x^{k})^{m}" if m > 1 else f"(1 - x^{k})"
            for k, m in sorted(self.den_factors.items()))
        return f"({self.num.to_text()}) / ({fac})"

    def to_json(self) -> dict:
        return {"numerator": self.num.to_json(),
                "denominator_factors": [{"k": k, "multiplicity": m}
                                        for k, m in
                                        sorted(self.den_factors.items())]}

    def __repr__(self) -> str:
        return f"ExactRat({self.to_text()})"


def _poly_gcd(a: ExactPoly, b: ExactPoly) -> ExactPoly:
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    if a.is_zero():
        return a
    lead = a.coeffs[a.degree]
    return a * (1 / lead)


# ---------------------------------------------------------------------------
# combinatorial objects


@dataclass(frozen=True)
class DyckPath:
    """Heights delta_0..delta_{2r}; starts and ends at 0, stays >= 0."""

    heights: tuple[int, ...]

    def __post_init__(self) -> None:
        h = tuple(int(v) for v in self.heights)
        object.__setattr__(self, "heights", h)
        if len(h) % 2 == 0 or h[0] != 0 or h[-1] != 0:
            raise ValueError("a Dyck path has 2r+1 heights with ends at 0")
        if any(v < 0 for v in h):
            raise ValueError("heights must stay non-negative")
        if any(abs(a - b) != 1 for a, b in zip(h, h[1:])):
            raise ValueError("consecutive heights must differ by 1")

    @property
    def half_length(self) -> int:
        return (len(self.heights) - 1) // 2

    def steps(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.heights, self.heights[1:]))

    def descent_positions(self) -> tuple[int, ...]:
        """1-based step indices k with delta_k < delta_{k-1}."""
        return tuple(k for k in range(1, len(self.heights))
                     if self.heights[k] < self.heights[k - 1])

    def interior_product(self) -> int:
        """prod_{i=1}^{2r-1} delta_i."""
        prod = 1
        for v in self.heights[1:-1]:
            prod *= v
        return prod

    def lifted(self) -> "DyckPath":
        """Ascending step in front, descending step behind."""
        return DyckPath((0,) + tuple(v + 1 for v in self.heights) + (0,))


@dataclass(frozen=True)
class LabelledDyckPath:
    """Dyck path with one label per descending step (in step order).

    A label at a descent leaving height h lies in 1..h.
    """

    path: DyckPath
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(int(v) for v in self.labels))
        descents = self.path.descent_positions()
        if len(self.labels) != len(descents):
            raise ValueError("one label per descending step required")
        for lab, k in zip(self.labels, descents):
            top = self.path.heights[k - 1]
            if not 1 <= lab <= top:
                raise ValueError(f"label {lab} outside 1..{top}")


@dataclass(frozen=True)
class Pairing:
    """Perfect matching of {1..2r} as disjoint ordered pairs (a < b)."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple(sorted((min(a, b), max(a, b))
                             for a, b in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        flat = sorted(p for ab in pairs for p in ab)
        if flat != list(range(1, 2 * len(pairs) + 1)):
            raise ValueError("pairs must exactly cover 1..2r")

    @property
    def size(self) -> int:
        return 2 * len(self.pairs)

    def partner(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for a, b in self.pairs:
            out[a], out[b] = b, a
        return out

    def is_noncrossing(self) -> bool:
        for (a, b), (c, d) in itertools.combinations(self.pairs, 2):
            if a < c < b < d or c < a < d < b:
                return False
        return True


@dataclass(frozen=True)
class LabelledTree:
    """Planar rooted tree; ``labels[i]`` sits on the edge to ``children[i]``.

    Heights are measured from the root (an edge to a root child has height
    1).  With all labels equal to 1 this doubles as a plain planar tree.
    """

    children: tuple["LabelledTree", ...] = ()
    labels: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.children) != len(self.labels):
            raise ValueError("one label per child edge required")

    @property
    def edge_count(self) -> int:
        return len(self.children) + sum(c.edge_count for c in self.children)

    def edge_heights(self) -> list[int]:
        out: list[int] = []

        def walk(node: "LabelledTree", depth: int) -> None:
            for child in node.children:
                out.append(depth + 1)
                walk(child, depth + 1)

        walk(self, 0)
        return out


@dataclass(frozen=True)
class Composition:
    """Ordered positive parts; descents are the proper prefix sums."""

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        parts = tuple(int(v) for v in self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts or any(v < 1 for v in parts):
            raise ValueError("parts must be positive integers")

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def descents(self) -> tuple[int, ...]:
        acc, out = 0, []
        for p in self.parts[:-1]:
            acc += p
            out.append(acc)
        return tuple(out)

    def multinomial(self) -> int:
        total, out = self.size, 1
        for p in self.parts:
            out *= comb(total, p)
            total -= p
        return out

    @classmethod
    def from_descent_set(cls, size: int,
                         descents: Iterable[int]) -> "Composition":
        ds = sorted(set(descents))
        parts, prev = [], 0
        for d in ds:
            parts.append(d - prev)
            prev = d
        parts.append(size - prev)
        return cls(tuple(parts))


def compositions(size: int) -> Iterator[Composition]:
    """All 2^(size-1) compositions, by descent subsets in sorted order."""
    positions = list(range(1, size))
    for mask in range(1 << len(positions)):
        ds = [positions[i] for i in range(len(positions)) if mask >> i & 1]
        yield Composition.from_descent_set(size, ds)


# ---------------------------------------------------------------------------
# enumeration and bijections


def _dyck_heights(r: int) -> list[tuple[int, ...]]:
    if r == 0:
        return [(0,)]
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], ups: int, downs: int) -> None:
        if ups + downs == 2 * r:
            out.append(tuple(prefix))
            return
        if ups < r:                               # ascending explored first
            prefix.append(prefix[-1] + 1)
            extend(prefix, ups + 1, downs)
            prefix.pop()
        if downs < ups:
            prefix.append(prefix[-1] - 1)
            extend(prefix, ups, downs + 1)
            prefix.pop()

    extend([0], 0, 0)
    return out


def enumerate_dyck(r: int, cap: int = DYCK_CAP) -> list[DyckPath]:
    """All Dyck paths of length 2r, deterministic lexicographic-by-steps
    order (ascending step before descending at every branch)."""
    if r < 1:
        raise ValueError("r must be at least 1")
    if r > cap:
        raise ValueError(f"r={r} exceeds the enumeration cap {cap}")
    return [DyckPath(h) for h in _dyck_heights(r)]


def enumerate_dyck_star(r: int, cap: int = DYCK_CAP) -> list[DyckPath]:
    """Paths of length 2r touching zero only at the ends: lifts of length
    2r-2 paths, so there are Catalan(r-1) of them."""
    if r < 1:
        raise ValueError("r must be at least 1")
    if r > cap:
        raise ValueError(f"r={r} exceeds the enumeration cap {cap}")
    if r == 1:
        return [DyckPath((0, 1, 0))]
    return [p.lifted() for p in enumerate_dyck(r - 1, cap)]


def enumerate_pairings(r: int) -> list[Pairing]:
    """All (2r-1)!! pairings of {1..2r}."""
    out: list[Pairing] = []

    def rec(avail: tuple[int, ...], acc: list[tuple[int, int]]) -> None:
        if not avail:
            out.append(Pairing(tuple(acc)))
            return
        a = avail[0]
        for i in range(1, len(avail)):
            b = avail[i]
            rec(avail[1:i] + avail[i + 1:], acc + [(a, b)])

    rec(tuple(range(1, 2 * r + 1)), [])
    return out


def even_set_partitions(m: int) -> Iterator[list[tuple[int, ...]]]:
    """Set partitions of {1..m} with all block sizes even."""
    if m % 2:
        return
    items = tuple(range(1, m + 1))

    def rec(rest: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
        if not rest:
            yield []
            return
        head, tail = rest[0], rest[1:]
        for odd in range(1, len(tail) + 1, 2):
            for extra in itertools.combinations(tail, odd):
                block = (head,) + extra
                remaining = tuple(v for v in tail if v not in extra)
                for parts in rec(remaining):
                    yield [block] + parts

    yield from rec(items)


def pairing_to_labelled_dyck(p: Pairing) -> LabelledDyckPath:
    """Openers ascend; a closer descends with label i when it closes the
    i-th currently open bond counted from the right (most recent = 1)."""
    partner = p.partner()
    heights = [0]
    labels: list[int] = []
    open_positions: list[int] = []
    for k in range(1, p.size + 1):
        if partner[k] > k:
            open_positions.append(k)
            heights.append(heights[-1] + 1)
        else:
            idx = open_positions.index(partner[k])
            labels.append(len(open_positions) - idx)
            open_positions.pop(idx)
            heights.append(heights[-1] - 1)
    return LabelledDyckPath(DyckPath(tuple(heights)), tuple(labels))


def labelled_dyck_to_pairing(ld: LabelledDyckPath) -> Pairing:
    open_positions: list[int] = []
    pairs: list[tuple[int, int]] = []
    labels = iter(ld.labels)
    for k, step in enumerate(ld.path.steps(), start=1):
        if step == 1:
            open_positions.append(k)
        else:
            i = next(labels)
            a = open_positions.pop(len(open_positions) - i)
            pairs.append((a, k))
    return Pairing(tuple(pairs))


def noncrossing_pairing(path: DyckPath) -> Pairing:
    """The unique non-crossing pairing with this Dyck shape (labels all 1)."""
    labels = tuple(1 for _ in path.descent_positions())
    return labelled_dyck_to_pairing(LabelledDyckPath(path, labels))


def dyck_to_tree(ld: LabelledDyckPath) -> LabelledTree:
    """Read the path as the depth-first code of a planar rooted tree; the
    label of a descending step becomes the label of the closed edge."""
    steps = ld.path.steps()
    labels = iter(ld.labels)

    pos = 0

    def parse() -> tuple[tuple[LabelledTree, ...], tuple[int, ...]]:
        nonlocal pos
        children: list[LabelledTree] = []
        edge_labels: list[int] = []
        while pos < len(steps) and steps[pos] == 1:
            pos += 1
            sub_children, sub_labels = parse()
            # the matching descending step closes this edge
            pos += 1
            edge_labels.append(next(labels))
            children.append(LabelledTree(sub_children, sub_labels))
        return tuple(children), tuple(edge_labels)

    children, edge_labels = parse()
    return LabelledTree(children, edge_labels)


def tree_to_dyck(tree: LabelledTree) -> LabelledDyckPath:
    heights = [0]
    labels: list[int] = []

    def walk(node: LabelledTree) -> None:
        for child, lab in zip(node.children, node.labels):
            heights.append(heights[-1] + 1)
            walk(child)
            heights.append(heights[-1] - 1)
            labels.append(lab)

    walk(tree)
    return LabelledDyckPath(DyckPath(tuple(heights)), tuple(labels))


# label ordering caveat: dyck_to_tree consumes labels in step order, which is
# the order descending steps are met during the depth-first walk, so the two
# functions above are mutual inverses.


# ---------------------------------------------------------------------------
# tree functionals


def functional_N(tree: LabelledTree) -> int:
    """Product of edge heights: the size of the uncrossing class."""
    out = 1
    for h in tree.edge_heights():
        out *= h
    return out


def functional_F(tree: LabelledTree) -> int:
    """(-1)^(r-1) * prod_{h(e) != 1} (h(e) - 1) when exactly one edge has
    height 1, else 0."""
    heights = tree.edge_heights()
    if sum(1 for h in heights if h == 1) != 1:
        return 0
    r = len(heights)
    out = (-1) ** (r - 1)
    for h in heights:
        if h != 1:
            out *= h - 1
    return out


def _moebius(parts: int) -> int:
    return (-1) ** (parts - 1) * factorial(parts - 1)


def _pairing_of_partition(blocks: Sequence[tuple[int, ...]]) -> Pairing:
    pairs: list[tuple[int, int]] = []
    for block in blocks:
        srt = sorted(block)
        pairs.extend((srt[i], srt[i + 1]) for i in range(0, len(srt), 2))
    return Pairing(tuple(pairs))


def functional_F_moebius(p: Pairing) -> int:
    """Moebius-sum oracle: sum of mu over even set partitions projecting to
    the given pairing.  Exponential cost; capped at size 8."""
    if p.size > MOEBIUS_CAP:
        raise ValueError(f"pairing size {p.size} exceeds the Moebius cap "
                         f"{MOEBIUS_CAP}")
    total = 0
    for blocks in even_set_partitions(p.size):
        if _pairing_of_partition(blocks) == p:
            total += _moebius(len(blocks))
    return total


# ---------------------------------------------------------------------------
# joint cumulants of spins


def _pairing_exponent(p: Pairing, indices: Sequence[int]) -> int:
    return sum(indices[b - 1] - indices[a - 1] for a, b in p.pairs)


def joint_cumulant_spins(indices: Sequence[int],
                         cap: int = JOINT_CAP) -> ExactPoly:
    """Joint cumulant kappa(sigma(i_1), .., sigma(i_2r)) as an exact
    polynomial in x = tanh(beta), for non-decreasing indices.

    Equals ``(-1)^(r-1) sum over peak-free Dyck paths of
    (prod interior heights) * x^(exponent of the non-crossing pairing)``.
    Odd-length index lists give the zero polynomial (parity).
    """
    idx = [int(v) for v in indices]
    if any(b < a for a, b in zip(idx, idx[1:])):
        raise ValueError("indices must be non-decreasing")
    if any(v < 1 for v in idx):
        raise ValueError("indices must be positive")
    if len(idx) % 2:
        return ExactPoly.zero()
    if len(idx) > cap:
        raise ValueError(f"2r={len(idx)} exceeds the cap {cap}")
    if not idx:
        return ExactPoly.zero()
    r = len(idx) // 2
    sign = (-1) ** (r - 1)
    coeffs: dict[int, Fraction] = {}
    for path in enumerate_dyck_star(r, cap=max(DYCK_CAP, r)):
        nu = noncrossing_pairing(path)
        e = _pairing_exponent(nu, idx)
        coeffs[e] = coeffs.get(e, Fraction(0)) \
            + Fraction(sign * path.interior_product())
    return ExactPoly(coeffs)


def moebius_joint_cumulant(indices: Sequence[int]) -> ExactPoly:
    """Independent oracle: Moebius sum over even set partitions using the
    closed joint moments E[prod sigma] = x^((i2-i1)+(i4-i3)+...)."""
    idx = [int(v) for v in indices]
    if len(idx) % 2:
        return ExactPoly.zero()
    if len(idx) > MOEBIUS_CAP:
        raise ValueError(f"2r={len(idx)} exceeds the Moebius cap "
                         f"{MOEBIUS_CAP}")
    coeffs: dict[int, Fraction] = {}
    for blocks in even_set_partitions(len(idx)):
        mu = _moebius(len(blocks))
        e = 0
        for block in blocks:
            srt = sorted(block)
            e += sum(idx[srt[i + 1] - 1] - idx[srt[i] - 1]
                     for i in range(0, len(srt), 2))
        coeffs[e] = coeffs.get(e, Fraction(0)) + mu
    return ExactPoly(coeffs)


# ---------------------------------------------------------------------------
# compositions, contraction, and the functional B


def contract_diagram(nu: Pairing, c: Composition) -> tuple[int, ...]:
    """Open-bond counts of the contraction of nu along c.

    Entry i counts the bonds of nu crossing the boundary after the i-th
    group, i.e. the Dyck height of nu at the i-th descent of c.
    """
    if c.size != nu.size:
        raise ValueError("composition size must match the pairing size")
    out = []
    for d in c.descents():
        out.append(sum(1 for a, b in nu.pairs if a <= d < b))
    return tuple(out)


def functional_B(c: Composition, delta: DyckPath) -> ExactRat:
    """prod over descents d of c of x^(delta_d) / (1 - x^(delta_d))."""
    if c.size != delta.half_length * 2:
        raise ValueError("composition size must be the path length 2r")
    out = ExactRat.one()
    for d in c.descents():
        out = out * ExactRat.geometric_factor(delta.heights[d])
    return out


def magnetization_cumulant_estimate(r: int,
                                    cap: int = ESTIMATE_CAP) -> ExactRat:
    """Per-n coefficient sum_{c} sum_{delta} A(c) B(c,delta) C(delta).

    Multiplied by (-1)^(r-1) n this estimates kappa^(2r)(M_n); as stated it
    is the upper-bound side, an exact rational function of x.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if r > cap:
        raise ValueError(f"r={r} exceeds the estimate cap {cap}")
    paths = enumerate_dyck_star(r, cap=max(DYCK_CAP, r))
    # accumulate numerator monomial coefficients grouped by the multiset of
    # geometric factors in the denominator
    grouped: dict[tuple[tuple[int, int], ...], dict[int, Fraction]] = {}
    for c in compositions(2 * r):
        a = c.multinomial()
        ds = c.descents()
        for path in paths:
            cval = path.interior_product()
            heights = [path.heights[d] for d in ds]
            key = tuple(sorted(Counter(heights).items()))
            expo = sum(heights)
            bucket = grouped.setdefault(key, {})
            bucket[expo] = bucket.get(expo, Fraction(0)) + Fraction(a * cval)
    total = ExactRat(ExactPoly.zero(), {})
    for key, coeffs in sorted(grouped.items()):
        total = total + ExactRat(ExactPoly(coeffs), dict(key))
    return total


def magnetization_cumulant_exact(r: int, n: int,
                                 cap: int = ESTIMATE_CAP) -> ExactPoly:
    """Exact finite-n cumulant kappa^(2r)(M_n) as a polynomial in x.

    Sums multinomial * C(delta) * B(n, c, delta) over compositions and
    peak-free paths, with B(n, c, delta) the finite geometric sum over
    ordered site tuples.  Exponential in r but exact; intended for the
    small-n cross-checks against pmf cumulants.
    """
    if r < 1 or r > cap:
        raise ValueError(f"r must lie in 1..{cap}")
    if n < 1 or n > 40:
        raise ValueError("exact finite-n sums are for n <= 40")
    sign = (-1) ** (r - 1)
    paths = enumerate_dyck_star(r, cap=max(DYCK_CAP, r))
    coeffs: dict[int, Fraction] = {}
    for c in compositions(2 * r):
        a = c.multinomial()
        ds = c.descents()
        ell = c.length
        for path in paths:
            cval = path.interior_product()
            heights = [path.heights[d] for d in ds]
            weight = Fraction(sign * a * cval)
            for sites in itertools.combinations(range(n), ell):
                e = sum(h * (sites[i + 1] - sites[i])
                        for i, h in enumerate(heights))
                coeffs[e] = coeffs.get(e, Fraction(0)) + weight
    return ExactPoly(coeffs)


def polynomial_P(r: int, cap: int = ESTIMATE_CAP) -> ExactPoly:
    """The estimate made polynomial: estimate * (1-x)^(2r-1)."""
    est = magnetization_cumulant_estimate(r, cap)
    num = est.num * ExactPoly.one_minus_x_pow(1) ** (2 * r - 1)
    quo, rem = num.divmod(est.den_poly())
    if not rem.is_zero():
        raise ArithmeticError("estimate * (1-x)^(2r-1) failed to reduce to "
                              "a polynomial")
    return quo


def q_value(r: int, cap: int = Q_CAP) -> int:
    """Q(r) = sum over peak-free paths of the interior-height product."""
    if r < 1 or r > cap:
        raise ValueError(f"r must lie in 1..{cap}")
    return sum(p.interior_product()
               for p in enumerate_dyck_star(r, cap=max(r, DYCK_CAP)))


def q_value_tree_form(r: int, cap: int = Q_CAP) -> int:
    """Same quantity as a sum over planar trees of prod h(e)(h(e)+1)."""
    if r < 1 or r > cap:
        raise ValueError(f"r must lie in 1..{cap}")
    if r == 1:
        return 1
    total = 0
    for path in enumerate_dyck(r - 1, cap=max(r, DYCK_CAP)):
        labels = tuple(1 for _ in path.descent_positions())
        tree = dyck_to_tree(LabelledDyckPath(path, labels))
        prod = 1
        for h in tree.edge_heights():
            prod *= h * (h + 1)
        total += prod
    return total


def _double_factorial(k: int) -> int:
    if k <= 0:
        return 1
    out = 1
    while k > 0:
        out *= k
        k -= 2
    return out


def cumulant_bound(r: int, beta: float) -> float:
    """Per-n bound (2r-1)!! (2r-3)!! (e^(2 beta) + 1)^(2r-1) on
    |kappa^(2r)(M_n)| / n."""
    if r < 1:
        raise ValueError("r must be at least 1")
    return (_double_factorial(2 * r - 1) * _double_factorial(2 * r - 3)
            * (math.exp(2.0 * beta) + 1.0) ** (2 * r - 1))


# ---------------------------------------------------------------------------
# cumulants of an exact pmf (verification oracle)


class CancellationWarning(UserWarning):
    """The moment-to-cumulant triangle lost too many digits."""


def pmf_cumulants(pmf: LatticePmf, r_max: int) -> list[float]:
    """kappa^(1)..kappa^(r_max) of a 1-d lattice law.

    Central moments are accumulated about the mean with compensated
    summation; the moment-to-cumulant recursion then runs in float.  A
    :class:`CancellationWarning` is emitted when the cancellation in some
    kappa_r exceeds an estimated relative error of 1e-4.
    """
    if pmf.dim != 1:
        raise ValueError("pmf_cumulants expects a one-dimensional pmf")
    if not 1 <= r_max <= 12:
        raise ValueError("r_max must lie in 1..12")
    v = pmf.axis_values()
    p = pmf.probs()
    mean = math.fsum((p * v).tolist())
    x = v - mean
    mu = [1.0, 0.0]
    powers = np.ones_like(x)
    for _ in range(2, r_max + 1):
        powers = powers * x
        mu.append(math.fsum((p * powers * x).tolist()))
    kappa = [0.0] * (r_max + 1)
    kappa[1] = mean
    # moments inherit the log-space pmf accuracy (log-Gamma noise), roughly
    # 1e-11 in relative terms; the flag fires when the cancellation in the
    # triangle amplifies that beyond 1e-4
    input_rel = 1e-11
    shaky: list[int] = []
    for r in range(2, r_max + 1):
        terms = [mu[r]]
        for j in range(2, r - 1):
            terms.append(-comb(r - 1, j - 1) * kappa[j] * mu[r - j])
        kappa[r] = math.fsum(terms)
        scale = sum(abs(t) for t in terms)
        noise = scale * input_rel
        if (kappa[r] != 0.0 and noise / abs(kappa[r]) > 1e-4) or \
                (kappa[r] == 0.0 and noise > 1e-4):
            shaky.append(r)
    if shaky:
        warnings.warn(
            f"catastrophic cancellation suspected in cumulants {shaky}",
            CancellationWarning, stacklevel=2)
    return kappa[1:]
