"""SVG Gantt chart of a schedule: one row per satellite and per ground station."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .domain import Instance, Schedule
from .validator import validate_schedule

CANVAS_W = 1200.0
LABEL_W = 80.0
ROW_H = 24.0
PAD = 4.0

RED = "#d62728"
BLUE = "#1f77b4"
GRAY = "#9e9e9e"
WHITE = "#ffffff"


def _n(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _rect(x: float, y: float, w: float, h: float, fill: str, stroke: str = "none", cls: str = "") -> str:
    c = f' class="{cls}"' if cls else ""
    return (
        f'<rect{c} x="{_n(x)}" y="{_n(y)}" width="{_n(w)}" height="{_n(h)}" '
        f'fill="{fill}" stroke="{stroke}" stroke-width="1"/>'
    )


def render_gantt(inst: Instance, sch: Schedule, *, check: bool = True) -> str:
    """SVG text; the time axis maps [0, horizon] onto ``CANVAS_W`` pixels.

    White outlines mark windows, red boxes observations, blue boxes downloads
    and gray segments the stabilization plus slew after each observation.
    Raises ``ValueError`` for a schedule the validator rejects.
    """
    if check:
        v = validate_schedule(inst, sch)
        if not v.passed:
            raise ValueError("refusing to draw an invalid schedule:\n" + v.render())
    scale = CANVAS_W / inst.params.horizon_s
    rows = [("sat", s.id) for s in inst.satellites] + [("gs", g.id) for g in inst.stations]
    ypos = {r: PAD + i * ROW_H for i, r in enumerate(rows)}
    height = PAD * 2 + ROW_H * len(rows)
    width = LABEL_W + CANVAS_W + PAD
    bh = ROW_H - 2 * PAD

    def x(t: float) -> float:
        return LABEL_W + t * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(width)}" height="{_n(height)}" '
        f'viewBox="0 0 {_n(width)} {_n(height)}">',
        _rect(0, 0, width, height, "#303030"),
    ]
    for r in rows:
        y = ypos[r]
        out.append(
            f'<text x="4" y="{_n(y + ROW_H / 2 + 4)}" fill="{WHITE}" font-family="monospace" '
            f'font-size="11">{escape(r[1])}</text>'
        )
    for w in inst.otws:
        y = ypos[("sat", w.sat)] + PAD
        out.append(_rect(x(w.t_open_s), y, (w.t_close_s - w.t_open_s) * scale, bh, "none", WHITE, "window"))
    for d in inst.dtws:
        for r in (("sat", d.sat), ("gs", d.station)):
            y = ypos[r] + PAD
            out.append(_rect(x(d.t_open_s), y, (d.t_close_s - d.t_open_s) * scale, bh, "none", WHITE, "window"))
    for s in inst.satellites:
        obs = sorted((o for o in sch.observations if o.sat == s.id), key=lambda o: o.t_start_s)
        y = ypos[("sat", s.id)] + PAD
        for a, b in zip(obs, obs[1:]):
            wa, wb = inst.otw_by_key[a.otw_key], inst.otw_by_key[b.otw_key]
            end_a = a.t_start_s + inst.process_time(a.task, a.sat)
            slew = (abs(wa.roll_rad - wb.roll_rad) + abs(a.pitch_rad - b.pitch_rad)) / s.slew_rate_rad_per_s
            out.append(_rect(x(end_a), y + bh / 3, (s.stab_time_s + slew) * scale, bh / 3, GRAY, cls="transition"))
        for o in obs:
            tp = inst.process_time(o.task, o.sat)
            out.append(_rect(x(o.t_start_s), y, tp * scale, bh, RED, cls="observation"))
    for d in sorted(sch.downloads, key=lambda d: (d.t_start_s, d.dtw_key)):
        st = inst.dtw_by_key[d.dtw_key].station
        for r in (("sat", d.sat), ("gs", st)):
            out.append(_rect(x(d.t_start_s), ypos[r] + PAD, d.duration_s * scale, bh, BLUE, cls="download"))
    out.append("</svg>")
    return "\n".join(out) + "\n"
