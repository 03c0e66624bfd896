"""Two-state quantum engine: labelled kets, Born and ABL probabilities, and
Monte-Carlo chains of projective measurements with post-selection.

Slit, spin and polarization labels share one two-dimensional space:
U = z+ = H = (1, 0), L = z- = V = (0, 1), S = x+ = (U + L)/sqrt 2, and
R = (1, i)/sqrt 2 in the H/V basis.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, ParseError, UndefinedConditionalError
from .sampling import map_blocks

NORM_TOL = 1e-12


@dataclass(frozen=True)
class Ket2:
    """Normalized two-component state.  ``label`` is cosmetic and ignored by ``==``."""

    a: complex
    b: complex
    label: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameterError(f"Ket2 not normalized (|a|^2 + |b|^2 = {norm!r})")

    @classmethod
    def normalized(cls, a: complex, b: complex, label: Optional[str] = None) -> "Ket2":
        norm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if norm == 0:
            raise InvalidParameterError("cannot normalize the zero vector")
        return cls(a / norm, b / norm, label)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b])

    def inner(self, other: "Ket2") -> complex:
        """<self|other>."""
        return self.a.conjugate() * other.a + self.b.conjugate() * other.b

    def overlap(self, other: "Ket2") -> float:
        return abs(self.inner(other))

    def conjugate(self) -> "Ket2":
        return Ket2(self.a.conjugate(), self.b.conjugate(), self.label)

    def phased(self, phase: float) -> "Ket2":
        w = np.exp(1j * phase)
        return Ket2(self.a * w, self.b * w, self.label)

    def orthogonal(self, label: Optional[str] = None) -> "Ket2":
        return Ket2(-self.b.conjugate(), self.a.conjugate(), label)

    def __str__(self):
        return self.label or f"({self.a:.6g}, {self.b:.6g})"


@dataclass(frozen=True)
class Basis2:
    """An observable's eigenbasis: two orthonormal labelled outcomes."""

    name: str
    kets: tuple[Ket2, Ket2]

    def __post_init__(self):
        if len(self.kets) != 2:
            raise InvalidParameterError("a Basis2 needs exactly two kets")
        if self.kets[0].overlap(self.kets[1]) > NORM_TOL:
            raise InvalidParameterError(f"basis {self.name} is not orthogonal")

    @classmethod
    def completing(cls, name: str, ket: Ket2, other_label: Optional[str] = None) -> "Basis2":
        return cls(name, (ket, ket.orthogonal(other_label)))

    @property
    def labels(self) -> tuple[str, str]:
        return tuple(str(k) for k in self.kets)

    def index(self, label: str) -> int:
        target = spin_map(label)
        for i, k in enumerate(self.kets):
            if k.overlap(target) > 1 - 1e-9:
                return i
        raise InvalidParameterError(f"{label!r} is not an outcome of basis {self.name}")

    def __len__(self):
        return 2

    def __getitem__(self, i) -> Ket2:
        return self.kets[i]


_R2 = 1 / np.sqrt(2)

_STATES = {
    "U": (1, 0),
    "L": (0, 1),
    "S": (_R2, _R2),
    "A": (_R2, -_R2),
    "x+": (_R2, _R2),
    "x-": (_R2, -_R2),
    "z+": (1, 0),
    "z-": (0, 1),
    "H": (1, 0),
    "V": (0, 1),
    "R": (_R2, 1j * _R2),
    "Lc": (_R2, -1j * _R2),
}

_ALIASES = {"x↑": "x+", "x↓": "x-", "z↑": "z+", "z↓": "z-"}

STATE_LABELS = tuple(_STATES) + tuple(_ALIASES)


def spin_map(label: str) -> Ket2:
    """The named state; ``S`` and ``x+`` (also ``x↑``) are the same vector."""
    key = _ALIASES.get(label, label)
    try:
        a, b = _STATES[key]
    except KeyError:
        raise ParseError(f"unknown state label {label!r}; known: {', '.join(STATE_LABELS)}") from None
    return Ket2(a, b, key)


def _basis(name, l0, l1):
    return Basis2(name, (spin_map(l0), spin_map(l1)))


BASES = {
    "O": _basis("O", "U", "L"),
    "SA": _basis("SA", "S", "A"),
    "Jz": _basis("Jz", "z+", "z-"),
    "Jx": _basis("Jx", "x+", "x-"),
    "HV": _basis("HV", "H", "V"),
    "C": _basis("C", "R", "Lc"),
}


def basis(name: str) -> Basis2:
    try:
        return BASES[name]
    except KeyError:
        raise ParseError(f"unknown basis {name!r}; known: {', '.join(BASES)}") from None


def born_probability(state: Ket2, basis: Basis2, outcome_index: int) -> float:
    if outcome_index not in (0, 1):
        raise InvalidParameterError(f"outcome index {outcome_index} out of range")
    return abs(basis[outcome_index].inner(state)) ** 2


def born_distribution(state: Ket2, basis: Basis2) -> tuple[float, float]:
    return tuple(born_probability(state, basis, k) for k in (0, 1))


def abl_distribution(pre: Ket2, post: Ket2, basis: Basis2) -> tuple[float, float]:
    """ABL probabilities of each outcome of one intermediate measurement.

    P(k) = |<post|k><k|pre>|^2 / sum_j |<post|j><j|pre>|^2
    """
    weights = [abs(post.inner(k) * k.inner(pre)) ** 2 for k in basis.kets]
    total = sum(weights)
    if total <= 1e-300:
        raise UndefinedConditionalError(
            f"post-selection on {post} is impossible after measuring {basis.name} on {pre}"
        )
    return tuple(w / total for w in weights)


def abl_probability(pre: Ket2, post: Ket2, basis: Basis2, outcome_index: int) -> float:
    if outcome_index not in (0, 1):
        raise InvalidParameterError(f"outcome index {outcome_index} out of range")
    return abl_distribution(pre, post, basis)[outcome_index]


@dataclass(frozen=True)
class MeasurementChain:
    """Prepare ``pre``, measure each basis in ``steps`` in turn, then keep the
    trial only if a final projective test finds ``post`` (when given)."""

    pre: Ket2
    steps: tuple[Basis2, ...] = ()
    post: Optional[Ket2] = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def sequence_probabilities(self) -> dict[tuple[str, ...], float]:
        """Exact joint probability of each outcome sequence *and* acceptance."""
        out = {}
        for seq in itertools.product((0, 1), repeat=len(self.steps)):
            p, state = 1.0, self.pre
            for b, k in zip(self.steps, seq):
                p *= born_probability(state, b, k)
                state = b[k]
            if self.post is not None:
                p *= abs(self.post.inner(state)) ** 2
            out[tuple(str(b[k]) for b, k in zip(self.steps, seq))] = p
        return out

    def acceptance_probability(self) -> float:
        return sum(self.sequence_probabilities().values())

    def conditional_probabilities(self, step: int) -> tuple[float, float]:
        """P(outcome of ``step`` | accepted); for one step this is the ABL rule."""
        seqs = self.sequence_probabilities()
        total = sum(seqs.values())
        if total <= 1e-300:
            raise UndefinedConditionalError("post-selection is impossible for this chain")
        labels = self.steps[step].labels
        return tuple(sum(p for s, p in seqs.items() if s[step] == lab) / total for lab in labels)


@dataclass(frozen=True)
class ChainResult:
    chain: MeasurementChain
    n: int
    accepted: int
    sequence_counts: dict  # accepted trials only, keyed by outcome-label tuples

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.n

    def frequencies(self, step: int) -> tuple[float, float]:
        labels = self.chain.steps[step].labels
        if self.accepted == 0:
            return (float("nan"), float("nan"))
        return tuple(
            sum(c for s, c in self.sequence_counts.items() if s[step] == lab) / self.accepted
            for lab in labels
        )


def run_chain(chain: MeasurementChain, n: int, seed: int = 42, workers: int = 1) -> ChainResult:
    """Sample ``n`` trials of ``chain``; each collapse follows the Born rule."""
    if n < 1:
        raise InvalidParameterError("need at least one trial")
    steps = chain.steps
    # transition tables: prob of outcome 0 at step s given the previous ket
    first = born_probability(chain.pre, steps[0], 0) if steps else None
    trans = [np.array([born_probability(steps[s - 1][j], steps[s], 0) for j in (0, 1)])
             for s in range(1, len(steps))]
    if chain.post is not None:
        if steps:
            accept_p = np.array([abs(chain.post.inner(steps[-1][j])) ** 2 for j in (0, 1)])
        else:
            accept_p = abs(chain.post.inner(chain.pre)) ** 2

    def block(rng, size):
        outcomes = np.empty((size, len(steps)), dtype=np.int8)
        if steps:
            outcomes[:, 0] = rng.random(size) >= first
            for s in range(1, len(steps)):
                outcomes[:, s] = rng.random(size) >= trans[s - 1][outcomes[:, s - 1]]
        if chain.post is None:
            keep = np.ones(size, dtype=bool)
        elif steps:
            keep = rng.random(size) < accept_p[outcomes[:, -1]]
        else:
            keep = rng.random(size) < accept_p
        codes = outcomes[keep].astype(np.int64) @ (1 << np.arange(len(steps), dtype=np.int64)) if steps \
            else np.zeros(int(keep.sum()), dtype=np.int64)
        return np.bincount(codes, minlength=1 << len(steps))

    totals = np.sum(map_blocks(block, n, seed, workers), axis=0)
    counts = Counter()
    for code, c in enumerate(totals):
        if c:
            seq = tuple(str(steps[s][(code >> s) & 1]) for s in range(len(steps)))
            counts[seq] = int(c)
    return ChainResult(chain, n, int(totals.sum()), dict(counts))


_TOKEN = re.compile(r"\S+")


def parse_chain(text: str) -> MeasurementChain:
    """Parse ``pre=x+ steps=Jx,Jz post=z+``.

    Grammar: whitespace-separated ``key=value`` tokens, keys ``pre`` (required),
    ``steps`` (comma-separated basis names, may be empty) and ``post`` (a state
    label, may be empty).  Errors carry the 0-based character position.
    """
    seen: dict[str, tuple[str, int]] = {}
    for m in _TOKEN.finditer(text):
        tok, pos = m.group(), m.start()
        key, eq, value = tok.partition("=")
        if not eq:
            raise ParseError(f"expected key=value, got {tok!r}", position=pos)
        if key not in ("pre", "steps", "post"):
            raise ParseError(f"unknown key {key!r}", position=pos)
        if key in seen:
            raise ParseError(f"duplicate key {key!r}", position=pos)
        seen[key] = (value, pos + len(key) + 1)
    if "pre" not in seen or not seen["pre"][0]:
        raise ParseError("missing pre=<state>", position=len(text))

    def state(key):
        value, pos = seen[key]
        try:
            return spin_map(value)
        except ParseError as e:
            raise ParseError(str(e), position=pos) from None

    steps = []
    if "steps" in seen and seen["steps"][0]:
        value, pos = seen["steps"]
        for name in value.split(","):
            if name not in BASES:
                raise ParseError(f"unknown basis {name!r}; known: {', '.join(BASES)}", position=pos)
            steps.append(BASES[name])
            pos += len(name) + 1
    post = state("post") if "post" in seen and seen["post"][0] else None
    return MeasurementChain(state("pre"), tuple(steps), post)


def format_chain(chain: MeasurementChain) -> str:
    steps = ",".join(b.name for b in chain.steps)
    post = str(chain.post) if chain.post is not None else ""
    return f"pre={chain.pre} steps={steps} post={post}"
