"""Demo kernel: major-absorber optical-depth interpolation.

A radiative-transfer style lookup/contract kernel exercising every
language feature: select with a comparison, gathers (subscripted
subscripts), in-place index construction, shifted constants inside
construct elements, scalar broadcasting, and a three-way reduction.

The reading is made fully shape-consistent here: the flavor choice is a
rank-2 int map over (column, g-point) via a per-g band lookup, and the
eta base pair carries its (x, g, p) dependence explicitly. The final
statement contracts mixing weights and interpolation factors against the
coefficient table over the three offset indices.
"""

from __future__ import annotations

import random

FIXTURE_SOURCE = """\
# major-absorber optical depth, one band group
const NX = 16;     # columns
const NG = 16;     # g-points
const NBND = 4;    # bands
const NFLAV = 2;   # absorber flavors
const NT = 8;      # T axis of the coefficient table
const NP = 8;      # p axis
const NETA = 4;    # eta axis

parallel index x : NX;
parallel index g : NG;
index t : 2;       # T offsets
index p : 2;       # p offsets
index e : 2;       # eta offsets

scalar strato : f64;
scalar j_T : int;
scalar j_p : int;

tensor p_lev : [NX];
tensor g_bnd : [NG] of int;
tensor bnd_to_flav : [2, NBND] of int;
tensor j_eta : [NFLAV, NX, 2] of int;
tensor r_mix : [NFLAV, NX, 2];
tensor f_major : [NFLAV, NX, 2, 2, 2];
tensor k_major : [NT, NP, NETA, NG] of f64;

i_strato = select(p_lev[x] <= strato, 1, 0)
i_flav = bnd_to_flav[i_strato[x], g_bnd[g]]
i_T = [j_T, j_T + 1]
i_eta[x, g, p] = [j_eta[i_flav[x, g], x, p], j_eta[i_flav[x, g], x, p] + 1]
i_p = [j_p + i_strato[x], j_p + i_strato[x] + 1]
tau_abs[x, g] = r_mix[i_flav[x, g], x, e] * f_major[i_flav[x, g], x, t, p, e] * k_major[i_T[t], i_p[x, p], i_eta[x, g, p, e], g]
"""

# Gather safety ranges: i_T reaches j_T+1 (< NT), i_p reaches j_p+2 (< NP),
# i_eta reaches j_eta+1 (< NETA).
EXTENTS = {"NX": 16, "NG": 16, "NBND": 4, "NFLAV": 2,
           "NT": 8, "NP": 8, "NETA": 4}

RawTensor = tuple[tuple[int, ...], list]


def make_raw_inputs(seed: int = 0) -> dict[str, RawTensor]:
    """Random valid inputs as {name: (shape, flat row-major values)}."""
    rng = random.Random(seed)
    nx, ng = EXTENTS["NX"], EXTENTS["NG"]
    nflav, nbnd = EXTENTS["NFLAV"], EXTENTS["NBND"]
    nt, np_, neta = EXTENTS["NT"], EXTENTS["NP"], EXTENTS["NETA"]

    def floats(shape: tuple[int, ...], lo: float = -1.0, hi: float = 1.0
               ) -> RawTensor:
        size = 1
        for s in shape:
            size *= s
        return shape, [rng.uniform(lo, hi) for _ in range(size)]

    def ints(shape: tuple[int, ...], hi: int) -> RawTensor:
        size = 1
        for s in shape:
            size *= s
        return shape, [float(rng.randrange(hi)) for _ in range(size)]

    return {
        "strato": ((), [0.5]),
        "j_T": ((), [float(rng.randrange(nt - 1))]),
        "j_p": ((), [float(rng.randrange(np_ - 2))]),
        "p_lev": floats((nx,), 0.0, 1.0),
        "g_bnd": ints((ng,), nbnd),
        "bnd_to_flav": ints((2, nbnd), nflav),
        "j_eta": ints((nflav, nx, 2), neta - 1),
        "r_mix": floats((nflav, nx, 2)),
        "f_major": floats((nflav, nx, 2, 2, 2)),
        "k_major": floats((nt, np_, neta, ng)),
    }
