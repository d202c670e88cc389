"""Reader and writer for the ``.pfmc`` explicit-state model format.

Example::

    MODEL ctmc
    STATES 2
    INIT 0
    LABELS
      0 up
    TRANSITIONS
      0 1 2.0
      1 0 1.0
"""

from __future__ import annotations

from pathlib import Path

from .model import Ctmc, Dtmc, Model, ModelError


class ModelParseError(ModelError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_model(text: str) -> Model:
    kind = None
    num_states = None
    initial = None
    section = None
    labels: dict[int, set[str]] = {}
    transitions: list[tuple[int, int, float]] = []
    seen: dict[tuple[int, int], int] = {}

    def state_index(tok: str, lineno: int) -> int:
        try:
            s = int(tok)
        except ValueError:
            raise ModelParseError(lineno, f"expected a state index, got {tok!r}") from None
        if num_states is None:
            raise ModelParseError(lineno, "STATES must be declared before use")
        if not 0 <= s < num_states:
            raise ModelParseError(lineno, f"state {s} outside 0..{num_states - 1}")
        return s

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].upper()
        if head == "MODEL":
            if len(parts) != 2 or parts[1].lower() not in ("dtmc", "ctmc"):
                raise ModelParseError(lineno, "expected 'MODEL dtmc' or 'MODEL ctmc'")
            kind = parts[1].lower()
            section = None
        elif head == "STATES":
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) == 0:
                raise ModelParseError(lineno, "expected 'STATES <positive count>'")
            num_states = int(parts[1])
            section = None
        elif head == "INIT":
            if len(parts) != 2:
                raise ModelParseError(lineno, "expected 'INIT <state>'")
            initial = state_index(parts[1], lineno)
            section = None
        elif head == "LABELS" and len(parts) == 1:
            section = "labels"
        elif head == "TRANSITIONS" and len(parts) == 1:
            section = "transitions"
        elif section == "labels":
            s = state_index(parts[0], lineno)
            if len(parts) < 2:
                raise ModelParseError(lineno, "label line needs at least one label")
            labels.setdefault(s, set()).update(parts[1:])
        elif section == "transitions":
            if len(parts) != 3:
                raise ModelParseError(lineno, "expected '<from> <to> <value>'")
            src = state_index(parts[0], lineno)
            dst = state_index(parts[1], lineno)
            try:
                val = float(parts[2])
            except ValueError:
                raise ModelParseError(lineno, f"bad number {parts[2]!r}") from None
            if val < 0 or val != val:
                raise ModelParseError(lineno, f"negative or NaN value {parts[2]}")
            if kind == "ctmc" and src == dst:
                raise ModelParseError(lineno, "CTMC self-loops are implied by the exit rate")
            if (src, dst) in seen:
                raise ModelParseError(lineno, f"duplicate transition {src} {dst} (first on line {seen[src, dst]})")
            seen[src, dst] = lineno
            transitions.append((src, dst, val))
        else:
            raise ModelParseError(lineno, f"unexpected line {line!r}")

    if kind is None:
        raise ModelParseError(0, "missing MODEL declaration")
    if num_states is None:
        raise ModelParseError(0, "missing STATES declaration")
    if initial is None:
        raise ModelParseError(0, "missing INIT declaration")
    cls = Dtmc if kind == "dtmc" else Ctmc
    return cls.from_transitions(num_states, initial, transitions, labels)


def load_model(path) -> Model:
    return parse_model(Path(path).read_text(encoding="utf-8"))


def format_model(model: Model) -> str:
    lines = [f"MODEL {'ctmc' if model.continuous else 'dtmc'}",
             f"STATES {model.num_states}",
             f"INIT {model.initial}",
             "LABELS"]
    for s, names in enumerate(model.labels):
        if names:
            lines.append(f"  {s} {' '.join(sorted(names))}")
    lines.append("TRANSITIONS")
    for s in range(model.num_states):
        for t, v in model.row(s):
            lines.append(f"  {s} {t} {v!r}")
    return "\n".join(lines) + "\n"
