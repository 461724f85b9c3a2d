"""Product-operator expansions of spin-1/2 operators.

An operator on ``n`` spins is written as a real linear combination of bare
products ``B_s = I_{a1} (x) I_{a2} (x) ... (x) I_{an}`` with ``I_a = sigma_a / 2``
for ``a`` in ``x, y, z`` and the identity ``E`` otherwise. Printed factors
such as the ``2`` in ``2Iz1Iz2`` belong to the coefficient, never the
basis, so the basis stays orthogonal under ``Tr(B_s B_t)``.

Text form::

    expr   := [sign] term (('+' | '-') term)*
    term   := number ['*'] factor* | factor+
    factor := 'I' axis digit

A bare number denotes the identity component.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from sepent import tolerances
from sepent.linalg import IDENTITY2, PAULI, as_matrix, check_hermitian, num_qubits, tensor_product

AXES = ("x", "y", "z")
LABELS = ("E",) + AXES

_SINGLE = {"E": IDENTITY2, **{a: PAULI[a] / 2 for a in AXES}}

Pattern = tuple  # tuple of labels, one per spin, spin 1 first


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def weight(pattern: Pattern) -> int:
    return sum(1 for a in pattern if a != "E")


def sort_key(pattern: Pattern):
    """Weight first, then the (spin, axis) factor list: Iz1 < Iz2, Ix1Ix2 < Iy1Iy2."""
    factors = [(i, a) for i, a in enumerate(pattern) if a != "E"]
    return (weight(pattern), factors)


def all_patterns(n: int, include_identity: bool = True) -> list[Pattern]:
    pats = [p for p in itertools.product(LABELS, repeat=n)]
    if not include_identity:
        pats = [p for p in pats if weight(p)]
    return sorted(pats, key=sort_key)


def spin_operator(axis: str, spin: int, n: int) -> np.ndarray:
    """``I_axis`` on ``spin`` (1-based) of an ``n``-spin register."""
    pattern = ["E"] * n
    if not 1 <= spin <= n:
        raise ValueError(f"spin {spin} out of range 1..{n}")
    pattern[spin - 1] = axis
    return basis_operator(tuple(pattern))


def basis_operator(pattern: Pattern) -> np.ndarray:
    try:
        return tensor_product(*[_SINGLE[a] for a in pattern])
    except KeyError as exc:
        raise ValueError(f"unknown factor label {exc.args[0]!r}") from None


def basis_norm(pattern: Pattern) -> float:
    """``Tr(B_s B_s) = 2**n / 4**weight``."""
    return 2 ** len(pattern) / 4 ** weight(pattern)


def pattern_to_text(pattern: Pattern) -> str:
    return "".join(f"I{a}{i}" for i, a in enumerate(pattern, start=1) if a != "E")


def pattern_from_text(text: str, n: int) -> Pattern:
    e = parse_expr(text, n)
    if len(e.terms) != 1:
        raise ValueError(f"{text!r} is not a single product pattern")
    (pattern, coef), = e.terms.items()
    if coef != 1:
        raise ValueError(f"{text!r} carries a coefficient")
    return pattern


@dataclass
class ProductOperatorExpr:
    n_spins: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError("an expression needs at least one spin")
        clean = {}
        for pattern, coef in self.terms.items():
            pattern = tuple(pattern)
            if len(pattern) != self.n_spins or any(a not in LABELS for a in pattern):
                raise ValueError(f"bad pattern {pattern!r} for {self.n_spins} spins")
            coef = float(coef)
            if not np.isfinite(coef):
                raise ValueError(f"non-finite coefficient for {pattern!r}")
            clean[pattern] = coef
        self.terms = clean

    def __iter__(self) -> Iterator[tuple]:
        for pattern in sorted(self.terms, key=sort_key):
            yield pattern, self.terms[pattern]

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient(self, pattern: Pattern) -> float:
        return self.terms.get(tuple(pattern), 0.0)

    @property
    def identity_pattern(self) -> Pattern:
        return ("E",) * self.n_spins

    def has_identity(self) -> bool:
        return self.identity_pattern in self.terms

    def deviation(self) -> "ProductOperatorExpr":
        terms = {p: c for p, c in self.terms.items() if weight(p)}
        return ProductOperatorExpr(self.n_spins, terms)

    def scaled(self, factor: float) -> "ProductOperatorExpr":
        return ProductOperatorExpr(self.n_spins, {p: factor * c for p, c in self.terms.items()})

    def __str__(self) -> str:
        return format_expr(self)


def to_expr(rho, drop: float = 1e-14) -> ProductOperatorExpr:
    """Expand a Hermitian matrix in the bare product-operator basis.

    Coefficients with magnitude below ``drop`` are omitted.
    """
    rho = as_matrix(rho)
    n = num_qubits(rho.shape[0])
    terms = {}
    for pattern in all_patterns(n):
        b = basis_operator(pattern)
        # Tr(rho B) with B Hermitian, without forming the product.
        value = np.sum(rho * b.T) / basis_norm(pattern)
        if abs(value.imag) > tolerances.IMAG:
            raise ValueError(
                f"imaginary coefficient {value.imag:.3g} on {pattern_to_text(pattern) or 'E'}: "
                "matrix is not Hermitian"
            )
        if abs(value.real) >= drop:
            terms[pattern] = value.real
    return ProductOperatorExpr(n, terms)


def from_expr(e: ProductOperatorExpr) -> np.ndarray:
    dim = 2**e.n_spins
    m = np.zeros((dim, dim), dtype=complex)
    for pattern, coef in e:
        m += coef * basis_operator(pattern)
    return m


def _format_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_expr(e: ProductOperatorExpr) -> str:
    """Canonical text: terms by weight then pattern, factors by spin index."""
    pieces = []
    for pattern, coef in e:
        if coef == 0:
            continue
        factors = pattern_to_text(pattern)
        mag = abs(coef)
        if not factors:
            body = _format_number(mag)
        elif mag == 1:
            body = factors
        else:
            body = _format_number(mag) + factors
        sign = "-" if coef < 0 else "+"
        if not pieces:
            pieces.append(body if sign == "+" else "-" + body)
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces) if pieces else "0"


_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.peek() == ""


def parse_expr(text: str, n: Optional[int] = None) -> ProductOperatorExpr:
    """Parse a product-operator expression such as ``"Iz3 + 2Ix1Ix2"``.

    ``n`` fixes the spin count; when omitted it is the largest spin index used.
    """
    s = _Scanner(text)
    parsed: list[tuple[float, dict, int]] = []

    sign = 1.0
    if s.peek() and s.peek() in "+-":
        sign = -1.0 if s.peek() == "-" else 1.0
        s.pos += 1
    while True:
        start = s.pos
        coef, factors = _parse_term(s)
        parsed.append((sign * coef, factors, start))
        c = s.peek()
        if c == "":
            break
        if c not in "+-":
            raise ExprSyntaxError(f"expected '+' or '-', found {c!r}", s.pos)
        sign = -1.0 if c == "-" else 1.0
        s.pos += 1

    max_spin = max((i for _, f, _ in parsed for i in f), default=1)
    if n is None:
        n = max_spin
    terms: dict = {}
    for coef, factors, start in parsed:
        for spin in factors:
            if spin > n:
                raise ExprSyntaxError(f"spin {spin} exceeds spin count {n}", start)
        pattern = tuple(factors.get(i, "E") for i in range(1, n + 1))
        terms[pattern] = terms.get(pattern, 0.0) + coef
    return ProductOperatorExpr(n, {p: c for p, c in terms.items() if c != 0})


def _parse_term(s: _Scanner) -> tuple[float, dict]:
    coef = 1.0
    has_number = False
    s.skip_ws()
    m = _NUMBER.match(s.text, s.pos)
    if m:
        coef = float(m.group(0))
        has_number = True
        s.pos = m.end()
        if s.peek() == "*":
            s.pos += 1
            if s.peek() != "I":
                raise ExprSyntaxError("expected factor after '*'", s.pos)
    factors: dict = {}
    while s.peek() == "I":
        start = s.pos
        s.pos += 1
        axis = s.text[s.pos : s.pos + 1]
        if axis not in AXES:
            raise ExprSyntaxError(f"unknown axis {axis!r}", s.pos)
        s.pos += 1
        digit = s.text[s.pos : s.pos + 1]
        if not digit.isdigit() or digit == "0":
            raise ExprSyntaxError("expected spin index 1-9", s.pos)
        s.pos += 1
        spin = int(digit)
        if spin in factors:
            raise ExprSyntaxError(f"spin {spin} repeated within one term", start)
        factors[spin] = axis
    if not has_number and not factors:
        found = s.peek()
        raise ExprSyntaxError(f"expected term, found {found!r}" if found else "expected term", s.pos)
    return coef, factors


@dataclass
class MatchResult:
    matched: bool
    scale: float
    residual: float
    message: str = ""

    def __bool__(self) -> bool:
        return self.matched


def deviation(m) -> np.ndarray:
    """Traceless part ``m - Tr(m)/dim * I``."""
    m = as_matrix(m)
    return m - np.trace(m) / m.shape[0] * np.eye(m.shape[0])


def proportional_match(m, e: ProductOperatorExpr, tol: float = tolerances.STRUCTURAL) -> MatchResult:
    """Find the positive scale taking the deviation of ``m`` onto ``e``.

    ``scale`` minimizes ``||scale * deviation(m) - from_expr(e)||_F``; the match
    succeeds when the relative residual is below ``tol`` and the scale is positive.
    """
    m = check_hermitian(m)
    if e.has_identity():
        raise ValueError("expression has an identity component; match deviations only")
    if 2**e.n_spins != m.shape[0]:
        raise ValueError(f"expression acts on {e.n_spins} spins, matrix has dim {m.shape[0]}")
    target = from_expr(e)
    target_norm = np.linalg.norm(target)
    if target_norm == 0:
        raise ValueError("expression is zero")
    dev = deviation(m)
    dev_norm2 = np.vdot(dev, dev).real
    if dev_norm2 < tolerances.EXACT**2:
        raise ValueError("matrix has no deviation from the identity")
    scale = np.vdot(dev, target).real / dev_norm2
    residual = float(np.linalg.norm(scale * dev - target) / target_norm)
    if scale <= 0:
        return MatchResult(False, scale, residual, f"best scale {scale:.6g} is not positive")
    if residual >= tol:
        return MatchResult(False, scale, residual, f"relative residual {residual:.3g} exceeds {tol:g}")
    return MatchResult(True, scale, residual)
