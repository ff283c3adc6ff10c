"""Map-matching demo: sources, toy payload implementations, toy data.

Three sources live here.  ``PAPER_SOURCE`` is the well-known published
shape of the pipeline, which reuses ``gv``/``mapcell``/``cv`` freely;
it parses, but the move discipline rejects it.  ``FULL_SOURCE`` is the
same pipeline made linear with explicit clones.  ``MAPMATCH_SOURCE``
is the bundled reduced pipeline used by the CLI and the planner: the
trellis and interpolation stages take narrower argument lists so that
only ``cv`` needs cloning, giving a graph of exactly 4 call nodes and
6 edges (2 from inputs, 4 internal).

The payloads are deliberately tiny: 8 GPS points, a 3-segment map,
and a Viterbi pass over a 2-state trellis.
"""

from __future__ import annotations

import math

PAPER_SOURCE = """\
fn match_one(gv: GpsVector, mapcell: MapCell) -> RoadSpeedVector {
    #[kernel(offloaded = true, multiplicity = [1, 1, 1, 1],
        path = "projection.cpp")]
    let cv: CandiVector = projection(gv, mapcell);

    let t: Trellis = build_trellis(gv, cv, mapcell);
    let rsvbb: RoadSpeedVector = viterbi(t, cv);
    interpolate(rsvbb, mapcell)
}
"""

FULL_SOURCE = """\
fn match_one(gv: GpsVector, mapcell: MapCell) -> RoadSpeedVector {
    let (gva, gvb): (GpsVector, GpsVector) = clone(gv);
    let (mca, mcrest): (MapCell, MapCell) = clone(mapcell);
    let (mcb, mcc): (MapCell, MapCell) = clone(mcrest);
    #[kernel(offloaded = true, multiplicity = [1, 1, 1, 1],
        path = "projection.cpp")]
    let cv: CandiVector = projection(gva, mca);
    let (cva, cvb): (CandiVector, CandiVector) = clone(cv);
    let t: Trellis = build_trellis(gvb, cva, mcb);
    let rsvbb: RoadSpeedVector = viterbi(t, cvb);
    interpolate(rsvbb, mcc)
}
"""

MAPMATCH_SOURCE = """\
// reduced map-matching pipeline: 4 calls, one offloaded stage
fn match_one(gv: GpsVector, mapcell: MapCell) -> RoadSpeedVector {
    #[kernel(offloaded = true, multiplicity = [1, 1, 1, 1],
        path = "projection.cpp", macs = 192, bytes_in = 224,
        bytes_out = 512)]
    let cv: CandiVector = projection(gv, mapcell);
    let (cva, cvb): (CandiVector, CandiVector) = clone(cv);
    let t: Trellis = build_trellis(cva);
    let rsvbb: RoadSpeedVector = viterbi(t, cvb);
    interpolate(rsvbb)
}
"""

# 8 GPS points wandering along a bent road
GPS_POINTS = [
    (0.1, 0.2), (1.0, -0.1), (2.1, 0.15), (3.0, 0.1),
    (3.9, 0.6), (4.2, 1.4), (4.0, 2.3), (4.15, 3.1),
]

# 3 road segments: a horizontal run, a corner piece, a vertical run
MAP_SEGMENTS = [
    ((0.0, 0.0), (3.0, 0.0)),
    ((3.0, 0.0), (4.0, 1.0)),
    ((4.0, 1.0), (4.0, 3.5)),
]


def _project_on_segment(p, seg):
    (x1, y1), (x2, y2) = seg
    px, py = p
    dx, dy = x2 - x1, y2 - y1
    L2 = dx * dx + dy * dy
    t = 0.0 if L2 == 0 else ((px - x1) * dx + (py - y1) * dy) / L2
    t = max(0.0, min(1.0, t))
    qx, qy = x1 + t * dx, y1 + t * dy
    return (qx, qy), math.hypot(px - qx, py - qy)


def projection(gv, mapcell):
    """Per GPS point, the two nearest segment candidates."""
    cv = []
    for p in gv:
        scored = []
        for si, seg in enumerate(mapcell):
            q, d = _project_on_segment(p, seg)
            scored.append((d, si, q))
        scored.sort(key=lambda s: (s[0], s[1]))
        cv.append(tuple((si, q, d) for d, si, q in scored[:2]))
    return cv


def build_trellis(cv):
    """Emission costs plus 2x2 transition costs between steps."""
    emit = [[cand[2] for cand in point] for point in cv]
    trans = []
    for k in range(len(cv) - 1):
        m = [[0.0, 0.0], [0.0, 0.0]]
        for a in range(2):
            for b in range(2):
                (sa, qa, _), (sb, qb, _) = cv[k][a], cv[k + 1][b]
                jump = math.hypot(qa[0] - qb[0], qa[1] - qb[1])
                m[a][b] = jump + (0.5 if sa != sb else 0.0)
        trans.append(m)
    return {"emit": emit, "trans": trans}


def viterbi(t, cv):
    """Cheapest 2-state path; ties prefer the lower state index."""
    emit, trans = t["emit"], t["trans"]
    n = len(emit)
    cost = [emit[0][0], emit[0][1]]
    back: list[list[int]] = []
    for k in range(1, n):
        nxt = [0.0, 0.0]
        choice = [0, 0]
        for b in range(2):
            c0 = cost[0] + trans[k - 1][0][b]
            c1 = cost[1] + trans[k - 1][1][b]
            choice[b] = 0 if c0 <= c1 else 1
            nxt[b] = min(c0, c1) + emit[k][b]
        cost = nxt
        back.append(choice)
    state = 0 if cost[0] <= cost[1] else 1
    states = [state]
    for choice in reversed(back):
        state = choice[state]
        states.append(state)
    states.reverse()
    return [(cv[k][s][0], cv[k][s][1]) for k, s in enumerate(states)]


def interpolate(rsvbb):
    """Per-step speeds along the matched path, 3-tap smoothed."""
    speeds = []
    for k in range(1, len(rsvbb)):
        (_, qa), (sb, qb) = rsvbb[k - 1], rsvbb[k]
        speeds.append((sb, math.hypot(qb[0] - qa[0], qb[1] - qa[1])))
    out = []
    for k, (seg, _) in enumerate(speeds):
        lo, hi = max(0, k - 1), min(len(speeds), k + 2)
        avg = sum(v for _, v in speeds[lo:hi]) / (hi - lo)
        out.append((seg, round(avg, 9)))
    return out


TOY_IMPLS = {
    "projection": projection,
    "build_trellis": build_trellis,
    "viterbi": viterbi,
    "interpolate": interpolate,
}


def run_demo(schedule_seed: int = 0):
    """Parse, build, and execute the bundled pipeline on the toy data."""
    from .dfg import build_dfg
    from .executor import execute_dfg
    from .lang import parse_coord

    g = build_dfg(parse_coord(MAPMATCH_SOURCE))
    return execute_dfg(
        g, TOY_IMPLS, {"gv": GPS_POINTS, "mapcell": MAP_SEGMENTS},
        schedule_seed=schedule_seed)
