"""Offer/confirmation bookkeeping over a realized measurement history.

A timeline is a list of events from emission to detection.  For every gap
between consecutive events we record the forward-going offer state, the
backward-going confirmation state, and whether they coincide (up to phase).
Rules:

* offer: the state fixed by the latest preparation, measurement outcome or
  post-selection at or before the gap's start; nothing after emission alone.
* confirmation: the state selected by the event closing the gap.  A detector
  absorbs what reaches it, so a gap closing on detection is confirmed in the
  latest realized state.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import IncompleteTimelineError, ParseError
from .twostate import BASES, Basis2, Ket2, basis, spin_map

AGREEMENT_TOL = 1e-9


class Kind(enum.Enum):
    EMISSION = "emission"
    PREPARATION = "preparation"
    MEASUREMENT = "measurement"
    POSTSELECTION = "postselection"
    DETECTION = "detection"


@dataclass(frozen=True)
class Event:
    time: str
    kind: Kind
    state: Optional[Ket2] = None
    basis: Optional[Basis2] = None
    outcome_index: Optional[int] = None

    @classmethod
    def emission(cls, time="E"):
        return cls(time, Kind.EMISSION)

    @classmethod
    def detection(cls, time="D"):
        return cls(time, Kind.DETECTION)

    @classmethod
    def prep(cls, label: str, time: str):
        return cls(time, Kind.PREPARATION, spin_map(label))

    @classmethod
    def meas(cls, basis_name: str, outcome: Optional[str], time: str):
        b = basis(basis_name)
        return cls(time, Kind.MEASUREMENT, basis=b, outcome_index=None if outcome is None else b.index(outcome))

    @classmethod
    def post(cls, label: str, time: str):
        return cls(time, Kind.POSTSELECTION, spin_map(label))

    @property
    def realized(self) -> Optional[Ket2]:
        """The state this event leaves the system in, if any."""
        if self.kind is Kind.MEASUREMENT:
            if self.outcome_index is None:
                raise IncompleteTimelineError(f"measurement at {self.time} has no realized outcome")
            return self.basis[self.outcome_index]
        if self.kind in (Kind.PREPARATION, Kind.POSTSELECTION):
            return self.state
        return None


@dataclass(frozen=True)
class IntervalReport:
    from_event: str
    to_event: str
    offer: Optional[Ket2]  # None means unprepared
    confirmation: Optional[Ket2]
    determinate: bool
    determinate_state: Optional[str] = None


def _tag_number(tag: str) -> Optional[float]:
    m = re.fullmatch(r"t(\d+(?:\.\d+)?)", tag)
    return float(m.group(1)) if m else None


def validate(timeline: Sequence[Event]) -> None:
    if len(timeline) < 2:
        raise IncompleteTimelineError("a timeline needs at least emission and detection")
    if timeline[0].kind is not Kind.EMISSION or timeline[-1].kind is not Kind.DETECTION:
        raise IncompleteTimelineError("timeline must start with emission and end with detection")
    kinds = [e.kind for e in timeline]
    if kinds.count(Kind.EMISSION) != 1 or kinds.count(Kind.DETECTION) != 1:
        raise IncompleteTimelineError("exactly one emission and one detection allowed")
    if kinds.count(Kind.POSTSELECTION) > 1:
        raise IncompleteTimelineError("at most one post-selection allowed")
    tags = [e.time for e in timeline]
    if len(set(tags)) != len(tags):
        raise IncompleteTimelineError(f"event times must be distinct: {tags}")
    nums = [_tag_number(t) for t in tags]
    prev = None
    for t, v in zip(tags, nums):
        if v is None:
            continue
        if prev is not None and v <= prev[1]:
            raise IncompleteTimelineError(f"time {t} does not follow {prev[0]}")
        prev = (t, v)
    for e in timeline:
        if e.kind in (Kind.PREPARATION, Kind.POSTSELECTION) and e.state is None:
            raise IncompleteTimelineError(f"{e.kind.value} at {e.time} carries no state")
        if e.kind is Kind.MEASUREMENT:
            if e.basis is None:
                raise IncompleteTimelineError(f"measurement at {e.time} has no basis")
            e.realized  # raises on a missing outcome


def agree(offer: Optional[Ket2], confirmation: Optional[Ket2]) -> bool:
    return offer is not None and confirmation is not None and offer.overlap(confirmation) > 1 - AGREEMENT_TOL


def analyze(timeline: Sequence[Event]) -> list[IntervalReport]:
    validate(timeline)
    reports = []
    offer = None
    for start, end in zip(timeline, timeline[1:]):
        if start.realized is not None:
            offer = start.realized
        if end.kind is Kind.DETECTION:
            confirmation = offer
        else:
            confirmation = end.realized
        det = agree(offer, confirmation)
        reports.append(IntervalReport(start.time, end.time, offer, confirmation, det,
                                      str(offer) if det else None))
    return reports


def builtin_scenario(name: str) -> list[Event]:
    """Timelines for the standard diagrams.

    fig2*: polarization, preselect H, post-select R, with no intervening
    measurement (a), an H measurement (b) or an R measurement (c).
    fig3*: slits, prepare S, post-select U, with no grid (a), the grid as an
    S-confirming measurement (b) or which-slit detectors finding U (c).
    delayed-*: prepare S, then choose an interference (S-basis) or which-way
    (slit-basis) measurement before absorption.
    """
    E, D = Event.emission(), Event.detection()
    table = {
        "fig2a": [E, Event.prep("H", "t0"), Event.post("R", "t2"), D],
        "fig2b": [E, Event.prep("H", "t0"), Event.meas("HV", "H", "t1"), Event.post("R", "t2"), D],
        "fig2c": [E, Event.prep("H", "t0"), Event.meas("C", "R", "t1"), Event.post("R", "t2"), D],
        "fig3a": [E, Event.prep("S", "t0"), Event.post("U", "t2"), D],
        "fig3b": [E, Event.prep("S", "t0"), Event.meas("SA", "S", "t1"), Event.post("U", "t2"), D],
        "fig3c": [E, Event.prep("S", "t0"), Event.meas("O", "U", "t1"), Event.post("U", "t2"), D],
        "delayed-interference": [E, Event.prep("S", "t0"), Event.meas("SA", "S", "t1"), D],
        "delayed-whichway": [E, Event.prep("S", "t0"), Event.meas("O", "U", "t1"), D],
    }
    try:
        return list(table[name])
    except KeyError:
        raise ParseError(f"unknown scenario {name!r}; known: {', '.join(table)}") from None


SCENARIOS = ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c",
             "delayed-interference", "delayed-whichway")


def parse_timeline(text: str) -> list[Event]:
    """Parse ``E; prep S @t0; meas O=U @t1; post U @t2; D``.

    Items are separated by ``;``.  ``E`` and ``D`` may carry ``@tag``; the
    others require one.  Errors carry the 0-based character position.
    """
    events = []
    pos = 0
    for raw in text.split(";"):
        start = pos + len(raw) - len(raw.lstrip())
        pos += len(raw) + 1
        item = raw.strip()
        if not item:
            raise ParseError("empty timeline item", position=start)
        body, _, tag = item.partition("@")
        words = body.split()
        tag = tag.strip() or None
        try:
            if words == ["E"]:
                events.append(Event.emission(tag or "E"))
            elif words == ["D"]:
                events.append(Event.detection(tag or "D"))
            elif len(words) == 2 and words[0] in ("prep", "post", "meas"):
                if tag is None:
                    raise ParseError(f"{words[0]} needs an @time tag", position=start)
                if words[0] == "prep":
                    events.append(Event.prep(words[1], tag))
                elif words[0] == "post":
                    events.append(Event.post(words[1], tag))
                else:
                    bname, eq, outcome = words[1].partition("=")
                    events.append(Event.meas(bname, outcome if eq and outcome else None, tag))
            else:
                raise ParseError(f"cannot parse {item!r}", position=start)
        except ParseError as e:
            if e.position is None:
                raise ParseError(str(e), position=start) from None
            raise
        except ValueError as e:
            raise ParseError(str(e), position=start) from None
    return events


def format_timeline(timeline: Sequence[Event]) -> str:
    parts = []
    for e in timeline:
        if e.kind is Kind.EMISSION:
            parts.append("E" if e.time == "E" else f"E @{e.time}")
        elif e.kind is Kind.DETECTION:
            parts.append("D" if e.time == "D" else f"D @{e.time}")
        elif e.kind is Kind.PREPARATION:
            parts.append(f"prep {e.state} @{e.time}")
        elif e.kind is Kind.POSTSELECTION:
            parts.append(f"post {e.state} @{e.time}")
        else:
            outcome = "" if e.outcome_index is None else f"={e.basis[e.outcome_index]}"
            parts.append(f"meas {e.basis.name}{outcome} @{e.time}")
    return "; ".join(parts)


def _ket_record(k: Optional[Ket2]):
    if k is None:
        return None
    return {"label": k.label, "amplitudes": [[k.a.real, k.a.imag], [k.b.real, k.b.imag]]}


def _ket_from_record(r) -> Optional[Ket2]:
    if r is None:
        return None
    (ar, ai), (br, bi) = r["amplitudes"]
    return Ket2(complex(ar, ai), complex(br, bi), r["label"])


def to_records(reports: Sequence[IntervalReport]) -> list[dict]:
    return [
        {
            "from": r.from_event,
            "to": r.to_event,
            "offer": _ket_record(r.offer),
            "confirmation": _ket_record(r.confirmation),
            "determinate": r.determinate,
            "determinate_state": r.determinate_state,
        }
        for r in reports
    ]


def from_records(records: Sequence[dict]) -> list[IntervalReport]:
    return [
        IntervalReport(
            r["from"], r["to"], _ket_from_record(r["offer"]), _ket_from_record(r["confirmation"]),
            bool(r["determinate"]), r["determinate_state"],
        )
        for r in records
    ]


def dumps(reports: Sequence[IntervalReport]) -> str:
    return json.dumps({"schema": 1, "intervals": to_records(reports)}, indent=2, sort_keys=True)


def loads(text: str) -> list[IntervalReport]:
    doc = json.loads(text)
    return from_records(doc["intervals"])


def _name(k: Optional[Ket2], bra=False) -> str:
    if k is None:
        return "-"
    return f"<{k}|" if bra else f"|{k}>"


def render(reports: Sequence[IntervalReport]) -> str:
    """ASCII timeline; determinate segments are drawn ``==(X)==``, others ``-----``.

    Below it one table row per interval.
    """
    if not reports:
        return ""
    width = max(9, *(len(str(r.determinate_state)) + 6 for r in reports))
    line = reports[0].from_event
    for r in reports:
        seg = f"({r.determinate_state})".center(width, "=") if r.determinate else "-" * width
        line += f" {seg} {r.to_event}"
    rows = [line, ""]
    head = ("interval", "offer", "confirmation", "determinate")
    body = [
        (f"{r.from_event} -> {r.to_event}",
         "unprepared" if r.offer is None else _name(r.offer),
         _name(r.confirmation, bra=True),
         f"yes ({r.determinate_state})" if r.determinate else "no")
        for r in reports
    ]
    widths = [max(len(row[i]) for row in [head, *body]) for i in range(4)]
    for row in [head, *body]:
        rows.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(rows)
