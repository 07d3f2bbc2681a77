"""Miscalibration-discrimination plots and report serialisation.

The SVG is written by hand so output is byte-stable: coordinates are
formatted to two decimals and elements are emitted in a fixed order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from .decomposition import DecompositionReport
from .scoring import DomainError

UNC_RTOL = 1e-9
MARGIN = 0.05


@dataclass(frozen=True)
class McbDscEntry:
    label: str
    mcb: float
    dsc: float
    unc: float

    @classmethod
    def from_report(cls, label: str, report: DecompositionReport) -> "McbDscEntry":
        return cls(label, report.mcb, report.dsc, report.unc)

    @property
    def display_mcb(self) -> float:
        return max(self.mcb, 0.0)

    @property
    def display_dsc(self) -> float:
        return max(self.dsc, 0.0)

    @property
    def score(self) -> float:
        return self.unc - self.dsc + self.mcb


@dataclass(frozen=True)
class PlotLayout:
    width: int = 520
    height: int = 520
    left: float = 64.0
    right: float = 24.0
    top: float = 40.0
    bottom: float = 56.0

    @property
    def plot_width(self) -> float:
        return self.width - self.left - self.right

    @property
    def plot_height(self) -> float:
        return self.height - self.top - self.bottom


@dataclass(frozen=True)
class PlotSpec:
    entries: tuple
    x_range: tuple
    y_range: tuple
    isolines: tuple
    layout: PlotLayout = field(default_factory=PlotLayout)
    title: str = ""

    def __post_init__(self):
        if not self.entries:
            raise DomainError("plot needs at least one entry")
        _shared_unc(self.entries)
        if any(b <= a for a, b in zip(self.isolines, self.isolines[1:])):
            raise DomainError("isoline values must be strictly increasing")
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        if not (x1 > x0 and y1 > y0):
            raise DomainError("empty axis range")

    @property
    def unc(self) -> float:
        return self.entries[0].unc

    def to_px(self, mcb: float, dsc: float) -> tuple[float, float]:
        (x0, x1), (y0, y1), lay = self.x_range, self.y_range, self.layout
        px = lay.left + (mcb - x0) / (x1 - x0) * lay.plot_width
        py = lay.top + (1 - (dsc - y0) / (y1 - y0)) * lay.plot_height
        return px, py

    def from_px(self, px: float, py: float) -> tuple[float, float]:
        (x0, x1), (y0, y1), lay = self.x_range, self.y_range, self.layout
        mcb = x0 + (px - lay.left) / lay.plot_width * (x1 - x0)
        dsc = y0 + (1 - (py - lay.top) / lay.plot_height) * (y1 - y0)
        return mcb, dsc


def _shared_unc(entries) -> float:
    unc = entries[0].unc
    for e in entries[1:]:
        if abs(e.unc - unc) > UNC_RTOL * max(1.0, abs(unc)):
            raise DomainError(
                f"entries do not share one uncertainty term ({e.label}: {e.unc} vs {unc}); "
                "they must be evaluated on the same outcomes"
            )
    return unc


def nice_step(span: float, max_steps: int) -> float:
    if span <= 0:
        return 1.0
    raw = span / max_steps
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


def _ticks(lo: float, hi: float, max_ticks: int = 6) -> list[float]:
    step = nice_step(hi - lo, max_ticks)
    first = math.ceil(lo / step - 1e-9)
    out = []
    k = first
    while k * step <= hi + 1e-9 * step:
        out.append(round(k * step, 12))
        k += 1
    return out


def _padded(lo: float, hi: float) -> tuple[float, float]:
    span = hi - lo
    if span <= 0:
        span = max(abs(hi), 1.0)
    pad = max(MARGIN, 0.08) * span
    return lo - pad, hi + pad


def make_plot_spec(entries, isolines=None, layout: PlotLayout | None = None, title: str = "") -> PlotSpec:
    """Axis ranges with margin around every entry and the origin."""
    entries = tuple(entries)
    if not entries:
        raise DomainError("plot needs at least one entry")
    unc = _shared_unc(entries)
    xs = [0.0] + [e.display_mcb for e in entries]
    ys = [0.0] + [e.display_dsc for e in entries]
    x_range = _padded(min(xs), max(xs))
    y_range = _padded(min(ys), max(ys))
    if isolines is None:
        isolines = default_isolines(unc, x_range, y_range)
    return PlotSpec(entries, x_range, y_range, tuple(isolines), layout or PlotLayout(), title)


def default_isolines(unc: float, x_range, y_range, max_lines: int = 8) -> tuple:
    """Round score values whose isolines cross the plotting area."""
    (x0, x1), (y0, y1) = x_range, y_range
    s_min, s_max = unc - y1 + x0, unc - y0 + x1
    step = nice_step(s_max - s_min, max_lines)
    k0 = math.floor(s_min / step) + 1
    values = []
    k = k0
    while k * step < s_max:
        values.append(round(k * step, 12))
        k += 1
    return tuple(values[:max_lines])


def _clip_isoline(spec: PlotSpec, score: float):
    # dsc = mcb + (unc - score), clipped to the axis box
    (x0, x1), (y0, y1) = spec.x_range, spec.y_range
    off = spec.unc - score
    a = max(x0, y0 - off)
    b = min(x1, y1 - off)
    if b <= a:
        return None
    return (a, a + off), (b, b + off)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:g}"


def mcb_dsc_plot(spec: PlotSpec) -> str:
    """SVG document: MCB on x, DSC on y, grey score isolines, green UNC line."""
    lay = spec.layout
    out = io.StringIO()
    w = out.write
    w('<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n')
    w(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{lay.width}" '
      f'height="{lay.height}" viewBox="0 0 {lay.width} {lay.height}" '
      'font-family="Helvetica, Arial, sans-serif" font-size="11">\n')
    w(f'<rect x="0" y="0" width="{lay.width}" height="{lay.height}" fill="white"/>\n')
    if spec.title:
        w(f'<text x="{_fmt(lay.width / 2)}" y="22" text-anchor="middle" font-size="13">'
          f'{escape(spec.title)}</text>\n')
    w('<defs><clipPath id="plot-area">'
      f'<rect x="{_fmt(lay.left)}" y="{_fmt(lay.top)}" width="{_fmt(lay.plot_width)}" '
      f'height="{_fmt(lay.plot_height)}"/></clipPath></defs>\n')

    w('<g id="isolines" clip-path="url(#plot-area)">\n')
    for s in spec.isolines:
        seg = _clip_isoline(spec, s)
        if seg is None:
            continue
        (ax, ay), (bx, by) = seg
        p, q = spec.to_px(ax, ay), spec.to_px(bx, by)
        w(f'<line class="isoline" data-score="{s!r}" x1="{_fmt(p[0])}" y1="{_fmt(p[1])}" '
          f'x2="{_fmt(q[0])}" y2="{_fmt(q[1])}" stroke="#b0b0b0" stroke-width="1"/>\n')
        lx, ly = q
        w(f'<text x="{_fmt(lx - 3)}" y="{_fmt(ly + 12)}" text-anchor="end" fill="#909090" '
          f'font-size="9">{_tick_label(s)}</text>\n')
    seg = _clip_isoline(spec, spec.unc)
    if seg is not None:
        (ax, ay), (bx, by) = seg
        p, q = spec.to_px(ax, ay), spec.to_px(bx, by)
        w(f'<line class="unc-isoline" data-score="{spec.unc!r}" x1="{_fmt(p[0])}" y1="{_fmt(p[1])}" '
          f'x2="{_fmt(q[0])}" y2="{_fmt(q[1])}" stroke="#2ca02c" stroke-width="1.5"/>\n')
    w('</g>\n')

    x_ticks = _ticks(*spec.x_range)
    y_ticks = _ticks(*spec.y_range)
    bottom = lay.top + lay.plot_height
    w('<g id="axes" stroke="black" fill="none">\n')
    w(f'<rect x="{_fmt(lay.left)}" y="{_fmt(lay.top)}" width="{_fmt(lay.plot_width)}" '
      f'height="{_fmt(lay.plot_height)}"/>\n')
    for t in x_ticks:
        px, _ = spec.to_px(t, spec.y_range[0])
        w(f'<line x1="{_fmt(px)}" y1="{_fmt(bottom)}" x2="{_fmt(px)}" y2="{_fmt(bottom + 5)}"/>\n')
    for t in y_ticks:
        _, py = spec.to_px(spec.x_range[0], t)
        w(f'<line x1="{_fmt(lay.left - 5)}" y1="{_fmt(py)}" x2="{_fmt(lay.left)}" y2="{_fmt(py)}"/>\n')
    w('</g>\n<g id="tick-labels">\n')
    for t in x_ticks:
        px, _ = spec.to_px(t, spec.y_range[0])
        w(f'<text x="{_fmt(px)}" y="{_fmt(bottom + 18)}" text-anchor="middle">{_tick_label(t)}</text>\n')
    for t in y_ticks:
        _, py = spec.to_px(spec.x_range[0], t)
        w(f'<text x="{_fmt(lay.left - 8)}" y="{_fmt(py + 4)}" text-anchor="end">{_tick_label(t)}</text>\n')
    w(f'<text x="{_fmt(lay.left + lay.plot_width / 2)}" y="{_fmt(lay.height - 14)}" '
      'text-anchor="middle" font-size="12">MCB</text>\n')
    w(f'<text x="16" y="{_fmt(lay.top + lay.plot_height / 2)}" text-anchor="middle" font-size="12" '
      f'transform="rotate(-90 16 {_fmt(lay.top + lay.plot_height / 2)})">DSC</text>\n')
    w('</g>\n')

    w('<g id="points">\n')
    placed = []
    for e in spec.entries:
        px, py = spec.to_px(e.display_mcb, e.display_dsc)
        w(f'<circle class="entry" data-label="{escape(e.label, {chr(34): "&quot;"})}" '
          f'cx="{_fmt(px)}" cy="{_fmt(py)}" r="3.5" fill="black"/>\n')
        lx, ly = _place_label(px + 6, py - 6, e.label, placed)
        w(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}">{escape(e.label)}</text>\n')
    w('</g>\n</svg>\n')
    return out.getvalue()


def _place_label(x: float, y: float, label: str, placed: list, max_tries: int = 12):
    # fixed-order nudging: step down until the box clears earlier labels
    w, h = 6.2 * len(label), 12.0
    for _ in range(max_tries):
        box = (x, y - h, x + w, y)
        if not any(box[0] < b[2] and b[0] < box[2] and box[1] < b[3] and b[1] < box[3] for b in placed):
            break
        y += h
    placed.append((x, y - h, x + w, y))
    return x, y


def _check_finite(payload: dict) -> None:
    for k, v in payload.items():
        if isinstance(v, float) and not math.isfinite(v):
            raise DomainError(f"report field {k!r} is not finite; refusing to write")


def report_json(report: DecompositionReport, **extra) -> dict:
    payload = dict(extra)
    payload.update(report.to_dict())
    _check_finite(payload)
    return payload


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_umask())  # mkstemp creates 0600 files
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"cannot write {path}: {exc}") from exc


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_report_json(report: DecompositionReport, path) -> None:
    atomic_write_text(path, dumps_json(report_json(report)))


def read_report_json(path) -> DecompositionReport:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    return DecompositionReport.from_dict(data)


STUDY_COLUMNS = (
    "forecaster",
    "interval_score",
    "coverage",
    "length",
    "recal_open_coverage",
    "recal_closed_coverage",
    "recal_length",
)


def study_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STUDY_COLUMNS)
    for r in rows:
        writer.writerow([r.forecaster.value] + [repr(float(getattr(r, c))) for c in STUDY_COLUMNS[1:]])
    return buf.getvalue()
