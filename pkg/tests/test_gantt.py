import re

import pytest

from agilesched.domain import Download, Observation, Schedule
from agilesched.gantt import BLUE, CANVAS_W, GRAY, RED, render_gantt

from helpers import dtw, instance, otw, sat, task


def rects(svg, cls):
    return re.findall(rf'<rect class="{cls}" x="([\d.]+)" y="[\d.]+" width="([\d.]+)"[^>]*fill="([^"]+)"', svg)


def small():
    return instance(
        [sat()], [task("A"), task("B")],
        [otw("A", "S1", 0, 0.0, 100.0), otw("B", "S1", 0, 0.0, 400.0, roll_deg=115.0)],
        [dtw("d", "S1", "G1", 0, 300.0, 400.0)],
        horizon=600.0,
    )


def test_empty_schedule_has_no_boxes():
    svg = render_gantt(small(), Schedule())
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert not rects(svg, "observation") and not rects(svg, "download") and not rects(svg, "transition")
    assert len(rects(svg, "window")) == 4


def test_one_observation_one_download():
    sch = Schedule((Observation("A", 1, "S1", 0, 10.0, 0.0),), (Download("d", "S1", 0, 300.0, 300.5),))
    svg = render_gantt(small(), sch)
    assert [f for *_, f in rects(svg, "observation")] == [RED]
    # the session is drawn on the satellite row and the station row
    assert [f for *_, f in rects(svg, "download")] == [BLUE, BLUE]


def test_transition_width_scales_with_horizon():
    # stabilization 5 s plus 115 deg at 1 deg/s gives a 120 s transition
    sch = Schedule((Observation("A", 1, "S1", 0, 0.0, 0.0), Observation("B", 1, "S1", 0, 123.0, 0.0)))
    svg = render_gantt(small(), sch)
    ((x, w, fill),) = rects(svg, "transition")
    assert fill == GRAY
    assert float(w) == pytest.approx(120.0 * CANVAS_W / 600.0, abs=1e-3)


def test_invalid_schedule_refused():
    sch = Schedule((Observation("A", 1, "S1", 0, 0.0, 0.0), Observation("B", 1, "S1", 0, 50.0, 0.0)))
    with pytest.raises(ValueError, match="invalid"):
        render_gantt(small(), sch)
