"""Desk-scale SDK for accelerated pipelines.

Subpackages cover the path from a tensor kernel source file down to a
simulated deployment: `numerics` (parametric low-precision formats),
`ekl` (kernel language frontend), `tensorir` (typed IR, interpreter,
cost model), `coord` (dataflow coordination language and executor),
`olympus` (FPGA system planner and HLS-style C emission), `runtime`
(cluster scheduler/simulator with autotuning), `sentinel` (anomaly
detection with TPE model search), and `cli` (the `basecamp` command).
"""

__version__ = "0.1.0"
