"""Exact orbits of x -> x + alpha (mod 1), their 0/1 codings, and the
brute-force partition oracle for the undetermined sets.

Orbit points {k*alpha} are handled as residues ``k*P mod Q`` of the proxy
alpha = P/Q, so sorting and neighbour searches stay in integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Set, Tuple

from sturmian_targets.models.cf_core import Alpha
from sturmian_targets.models.errors import DomainError, HorizonError
from sturmian_targets.models.intervals import CircleInterval, frac_part


@dataclass(frozen=True)
class Coding:
    bits: str

    def __post_init__(self):
        if set(self.bits) - {"0", "1"}:
            raise DomainError(f"coding must be a 0/1 string, got {self.bits!r}")

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return self.bits

    def windows(self, m: int) -> Set[str]:
        return {self.bits[i:i + m] for i in range(len(self.bits) - m + 1)}


@dataclass(frozen=True)
class AtomPartition:
    step: int
    boundaries: Tuple[Fraction, ...]
    atoms: Tuple[CircleInterval, ...]
    alpha: Alpha

    def codings(self) -> List[Coding]:
        return [code(self.alpha, atom.start, self.step + 1) for atom in self.atoms]

    def rows(self) -> List[Dict[str, object]]:
        return [
            {
                "j": self.step,
                "left_num": str(atom.start.numerator),
                "left_den": str(atom.start.denominator),
                "right_num": str((atom.start + atom.length).numerator),
                "right_den": str((atom.start + atom.length).denominator),
                "coding": str(word),
            }
            for atom, word in zip(self.atoms, self.codings())
        ]


def _residue(alpha: Alpha, k: int) -> int:
    """{k*alpha} scaled by the denominator of alpha."""
    return (k * alpha.value.numerator) % alpha.value.denominator


def _point(alpha: Alpha, residue: int) -> Fraction:
    return Fraction(residue, alpha.value.denominator)


def rotate(alpha: Alpha, x: Fraction, k: int) -> Fraction:
    alpha.check_time(k, slack=1)
    return frac_part(Fraction(x) + k * alpha.value)


def code(alpha: Alpha, x: Fraction, length: int) -> Coding:
    """c_0..c_{length-1}; c_i = 0 iff {x + i*alpha} lies in [0, alpha)."""
    if length < 0:
        raise DomainError(f"negative coding length {length}")
    if length > alpha.horizon_j:
        raise HorizonError(f"coding length {length} beyond horizon_j={alpha.horizon_j}")
    point = frac_part(Fraction(x))
    bits = []
    for _ in range(length):
        bits.append("0" if point < alpha.value else "1")
        point = frac_part(point + alpha.value)
    return Coding("".join(bits))


def complexity(alpha: Alpha, x: Fraction, m: int, length: int) -> int:
    """Number of distinct length-m windows of code(alpha, x, length)."""
    return len(code(alpha, x, length).windows(m))


def _check_step(alpha: Alpha, j: int):
    if j < 0:
        raise DomainError(f"negative step {j}")
    if j + 1 > alpha.horizon_j:
        raise HorizonError(f"step {j} needs {j + 1} <= horizon_j={alpha.horizon_j}")


def _boundary_residues(alpha: Alpha, j: int) -> List[int]:
    # {-k*alpha}, -1 <= k <= j
    return sorted(_residue(alpha, -k) for k in range(-1, j + 1))


def atoms(alpha: Alpha, j: int) -> AtomPartition:
    """The j+2 atoms of the partition by c_0..c_j, sorted by left endpoint."""
    _check_step(alpha, j)
    residues = _boundary_residues(alpha, j)
    den = alpha.value.denominator
    arcs = []
    for idx, left in enumerate(residues):
        right = residues[idx + 1] if idx + 1 < len(residues) else residues[0] + den
        arcs.append(CircleInterval(_point(alpha, left), Fraction(right - left, den)))
    return AtomPartition(j, tuple(_point(alpha, r) for r in residues), tuple(arcs), alpha)


def _neighbours(den: int, target: int, residues: Iterable[int]) -> Tuple[int, int]:
    """Nearest residue at or below ``target`` and nearest strictly above it, cyclically."""
    below = above = den
    left = right = target
    for r in residues:
        down = (target - r) % den
        up = (r - target) % den
        if down < below:
            below, left = down, r
        if 0 < up < above:
            above, right = up, r
    return left, right


def undetermined_atom(alpha: Alpha, j: int) -> CircleInterval:
    """The atom at coding step j split by the next boundary point {-(j+1)*alpha}."""
    _check_step(alpha, j)
    den = alpha.value.denominator
    target = _residue(alpha, -(j + 1))
    left, right = _neighbours(den, target, (_residue(alpha, -k) for k in range(-1, j + 1)))
    return CircleInterval(_point(alpha, left), Fraction((right - left) % den, den))


def oracle_V(alpha: Alpha, j: int) -> CircleInterval:
    """V_j computed from the coding partition, indexed like the closed form.

    V_j = R^{-2}(undetermined atom at step j-2); V_1 is the whole circle.
    """
    if j < 1:
        raise DomainError(f"V_j is indexed from j=1, got {j}")
    alpha.check_time(j)
    if j == 1:
        return CircleInterval.full(rotate(alpha, 0, -1))
    return undetermined_atom(alpha, j - 2).rotate(-2 * alpha.value)


def oracle_V_by_cut(alpha: Alpha, j: int) -> CircleInterval:
    """V_j from the gap around 0 left by the orbit points {k*alpha}, 1 <= k <= j."""
    if j < 1:
        raise DomainError(f"V_j is indexed from j=1, got {j}")
    alpha.check_time(j)
    den = alpha.value.denominator
    if j == 1:
        gap = CircleInterval.full(alpha.value)
    else:
        residues = [_residue(alpha, k) for k in range(1, j + 1)]
        gap = CircleInterval(_point(alpha, max(residues)), Fraction(den - max(residues) + min(residues), den))
    return gap.rotate(-(j + 1) * alpha.value)


def atom_codings(alpha: Alpha, j: int) -> Set[str]:
    return {str(word) for word in atoms(alpha, j).codings()}


def right_special_word(alpha: Alpha, j: int) -> Coding:
    """Coding c_0..c_j shared by the undetermined atom at step j."""
    atom = undetermined_atom(alpha, j)
    return code(alpha, atom.start, j + 1)


def is_right_special(alpha: Alpha, word: Coding) -> bool:
    """Both one-letter extensions of ``word`` occur as atom codings one step later."""
    extended = atom_codings(alpha, len(word))
    return f"{word}0" in extended and f"{word}1" in extended


def right_special_prefix_count(alpha: Alpha, x: Fraction, N: int) -> int:
    """#{1 <= j <= N : x in V_j} read off codings alone.

    x lies in V_j exactly when the coding of x + 2*alpha up to step j-2 is the
    right-special word of that step; V_1 is the whole circle.
    """
    if N < 1:
        return 0
    _check_step(alpha, N - 1)
    word = str(code(alpha, rotate(alpha, x, 2), N - 1))
    return 1 + sum(1 for j in range(2, N + 1) if word[:j - 1] == str(right_special_word(alpha, j - 2)))
