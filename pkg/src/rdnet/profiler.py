"""Analytic FLOP and byte accounting for the pipeline variants.

One assumption does all the work: a complex multiply-accumulate costs 2
FLOPs.  It is printed in every report rather than hidden, since per-frame
GFLOPS figures are meaningless without the counting convention.  MB means
2^20 bytes throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .config import ValidatedConfig
from .errors import InvalidConfig

MB = float(1 << 20)

COMPLEX_MAC_ASSUMPTION = "complex MAC = 2 FLOPs"
REAL_MAC_ASSUMPTION = "real MAC = 2 FLOPs; conv MACs only (bias/BN/activation excluded)"


@dataclass(frozen=True)
class FlopReport:
    stage: str
    flops: float
    bytes: int
    assumptions: Tuple[str, ...]

    @property
    def gflops(self) -> float:
        return self.flops / 1e9

    @property
    def megabytes(self) -> float:
        return self.bytes / MB


def flops_aoa(config: ValidatedConfig, n_cells: int, b_a: int | None = None,
              b_e: int | None = None) -> FlopReport:
    """Angle correlation cost: 2 * n_cells * n_tx * n_rx * b_a * b_e FLOPs.

    b_a / b_e default to the config bins but can be overridden, e.g. to
    price a 900-bin azimuth sweep on a config whose maps are 896 wide.
    """
    if n_cells < 0:
        raise InvalidConfig(f"n_cells must be >= 0, got {n_cells}")
    b_a = config.b_a if b_a is None else b_a
    b_e = config.b_e if b_e is None else b_e
    flops = 2.0 * n_cells * config.n_tx * config.n_rx * b_a * b_e
    bytes_in = tensor_bytes((config.b_r, config.b_d, 2 * config.n_rx), 4)
    return FlopReport(
        stage=f"aoa({n_cells} cells, {b_a}x{b_e} angles)",
        flops=flops, bytes=bytes_in,
        assumptions=(COMPLEX_MAC_ASSUMPTION,))


def tensor_bytes(shape: Sequence[int], bytes_per_value: int) -> int:
    """Product of dims times bytes_per_value."""
    count = 1
    for d in shape:
        if d <= 0:
            raise InvalidConfig(f"non-positive dim {d} in shape {tuple(shape)}")
        count *= int(d)
    return count * int(bytes_per_value)


def model_flops_params(model) -> Tuple[FlopReport, int]:
    """Sum per-layer MACs (x2 FLOPs) and trainable parameters of the graph."""
    records = model.complexity(batch=1)
    macs = sum(r[1] for r in records)
    params = sum(p.value.size for p in model.parameters())
    cfg = model.config
    bytes_in = tensor_bytes((cfg.b_r, cfg.b_d, 2 * cfg.n_rx), 4)
    report = FlopReport(stage="model", flops=2.0 * macs, bytes=bytes_in,
                        assumptions=(REAL_MAC_ASSUMPTION,))
    return report, params


def combine_reports(stage: str, reports: Sequence[FlopReport]) -> FlopReport:
    """Additivity: a composed pipeline is the sum of its stages."""
    assumptions = []
    for r in reports:
        for a in r.assumptions:
            if a not in assumptions:
                assumptions.append(a)
    return FlopReport(stage=stage,
                      flops=sum(r.flops for r in reports),
                      bytes=sum(r.bytes for r in reports),
                      assumptions=tuple(assumptions))


def report_to_dict(report: FlopReport) -> dict:
    return {"stage": report.stage, "flops": report.flops,
            "gflops": report.gflops, "bytes": report.bytes,
            "megabytes": report.megabytes,
            "assumptions": list(report.assumptions)}


def format_table(rows: Sequence[dict]) -> str:
    """Aligned text table with the complexity-summary columns.

    Expects dicts with keys: method, input_mb, params_m (or None),
    aoa_gflops, model_gflops (or None).
    """
    headers = ["Method", "Input (MB)", "Params (1e6)", "AoA GFLOPS",
               "Model GFLOPS"]
    table = [headers]
    for r in rows:
        table.append([
            str(r["method"]),
            f"{r['input_mb']:.2f}",
            "-" if r.get("params_m") is None else f"{r['params_m']:.2f}",
            "-" if r.get("aoa_gflops") is None else f"{r['aoa_gflops']:.2f}",
            "-" if r.get("model_gflops") is None else f"{r['model_gflops']:.2f}",
        ])
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = []
    for i, row in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
