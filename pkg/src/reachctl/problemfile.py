"""Line-oriented problem files.

A problem file has labeled sections; numbers are plain decimals and
round-trip at 17 significant digits. Example:

    [system]
    A 0 1
    A 0 0
    B 0
    B 1
    a 0 0
    [simplex]
    vertex -1 1
    vertex 1 0
    vertex 0 0
    exit 0
    [options]
    tol 1e-9
    grid 10
    pin_control 1 0.5 0.25 -1
    pin_subdivision 0 0.75 0 0

`exit` names the vertex opposite the exit facet; vertices are reordered so
that vertex ends up first. Pinned controls are (piece index, vertex point,
control values); pinned subdivision points are consumed in iteration order.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .analysis import AffineSystem, ProblemInstance, affine_system, analyze
from .errors import ParseError
from .geometry import Simplex, build_simplex


@dataclass
class Problem:
    """Parsed problem data: system, simplex vertices and run options."""

    A: np.ndarray
    B: np.ndarray
    a: np.ndarray
    vertices: np.ndarray
    exit_vertex: int = 0
    tol: float = 1e-9
    grid: int = 10
    dt: Optional[float] = None
    tmax: Optional[float] = None
    pinned_controls: List[Tuple[int, np.ndarray, np.ndarray]] = field(default_factory=list)
    pinned_subdivision: List[np.ndarray] = field(default_factory=list)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def system(self) -> AffineSystem:
        return affine_system(self.A, self.B, self.a)

    def simplex(self) -> Simplex:
        order = [self.exit_vertex] + [i for i in range(self.n + 1) if i != self.exit_vertex]
        return build_simplex(self.vertices[order])

    def instance(self) -> ProblemInstance:
        return analyze(self.system(), self.simplex(), tol=self.tol)


def _floats(parts, line_no):
    out = []
    for col, tok in enumerate(parts, start=2):
        try:
            out.append(float(tok))
        except ValueError:
            raise ParseError(f"not a number: {tok!r}", line=line_no, column=col)
    return out


def parse_problem(text: str) -> Problem:
    """Parse a problem file; raises ParseError with line/column on bad input."""
    section = None
    A_rows, B_rows, a_row = [], [], None
    vertices = []
    exit_vertex = 0
    tol, grid, dt, tmax = 1e-9, 10, None, None
    pins, pin_sub = [], []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("system", "simplex", "options"):
                raise ParseError(f"unknown section [{section}]", line=line_no)
            continue
        parts = line.split()
        key = parts[0].lower()
        if section == "system":
            if key == "a" and parts[0] == "A":
                A_rows.append(_floats(parts[1:], line_no))
            elif key == "b" and parts[0] == "B":
                B_rows.append(_floats(parts[1:], line_no))
            elif key == "a":
                a_row = _floats(parts[1:], line_no)
            else:
                raise ParseError(f"unknown system entry {parts[0]!r}", line=line_no)
        elif section == "simplex":
            if key == "vertex":
                vertices.append(_floats(parts[1:], line_no))
            elif key == "exit":
                exit_vertex = int(parts[1])
            else:
                raise ParseError(f"unknown simplex entry {parts[0]!r}", line=line_no)
        elif section == "options":
            if key == "tol":
                tol = float(parts[1])
            elif key == "grid":
                grid = int(parts[1])
            elif key == "dt":
                dt = None if parts[1] == "auto" else float(parts[1])
            elif key == "tmax":
                tmax = None if parts[1] == "auto" else float(parts[1])
            elif key == "pin_control":
                vals = _floats(parts[2:], line_no)
                pins.append((int(parts[1]), vals))
            elif key == "pin_subdivision":
                pin_sub.append(np.array(_floats(parts[1:], line_no)))
            else:
                raise ParseError(f"unknown option {parts[0]!r}", line=line_no)
        else:
            raise ParseError("content before any [section]", line=line_no)

    if not A_rows:
        raise ParseError("missing [system] A rows")
    A = np.array(A_rows)
    n = A.shape[0]
    if A.shape[1] != n:
        raise ParseError(f"A must be square, got {A.shape}")
    if not B_rows:
        raise ParseError("missing [system] B rows")
    B = np.array(B_rows)
    if B.shape[0] != n:
        raise ParseError(f"B needs {n} rows, got {B.shape[0]}")
    if a_row is None:
        raise ParseError("missing [system] a row")
    if len(a_row) != n:
        raise ParseError(f"a needs {n} entries, got {len(a_row)}")
    if len(vertices) != n + 1:
        raise ParseError(f"need {n + 1} vertices, got {len(vertices)}")
    V = np.array(vertices)
    if V.shape[1] != n:
        raise ParseError(f"vertices must have {n} coordinates")
    if not 0 <= exit_vertex <= n:
        raise ParseError(f"exit vertex {exit_vertex} out of range")

    m = B.shape[1]
    pinned_controls = []
    for k, vals in pins:
        if len(vals) != n + m:
            raise ParseError(
                f"pin_control needs piece, {n} point coords and {m} control values"
            )
        pinned_controls.append((k, np.array(vals[:n]), np.array(vals[n:])))
    for pt in pin_sub:
        if pt.size != n:
            raise ParseError("pin_subdivision needs a point with n coordinates")

    return Problem(
        A=A, B=B, a=np.array(a_row), vertices=V, exit_vertex=exit_vertex,
        tol=tol, grid=grid, dt=dt, tmax=tmax,
        pinned_controls=pinned_controls, pinned_subdivision=pin_sub,
    )


def _fmt(x):
    return format(float(x), ".17g")


def serialize_problem(p: Problem) -> str:
    lines = ["[system]"]
    for row in p.A:
        lines.append("A " + " ".join(_fmt(v) for v in row))
    for row in p.B:
        lines.append("B " + " ".join(_fmt(v) for v in row))
    lines.append("a " + " ".join(_fmt(v) for v in p.a))
    lines.append("[simplex]")
    for row in p.vertices:
        lines.append("vertex " + " ".join(_fmt(v) for v in row))
    lines.append(f"exit {p.exit_vertex}")
    lines.append("[options]")
    lines.append("tol " + _fmt(p.tol))
    lines.append(f"grid {p.grid}")
    lines.append("dt " + ("auto" if p.dt is None else _fmt(p.dt)))
    lines.append("tmax " + ("auto" if p.tmax is None else _fmt(p.tmax)))
    for k, point, u in p.pinned_controls:
        lines.append(
            f"pin_control {k} " + " ".join(_fmt(v) for v in point) + " " +
            " ".join(_fmt(v) for v in u)
        )
    for pt in p.pinned_subdivision:
        lines.append("pin_subdivision " + " ".join(_fmt(v) for v in pt))
    return "\n".join(lines) + "\n"


def load_problem(path) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())


def save_problem(p: Problem, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_problem(p))
