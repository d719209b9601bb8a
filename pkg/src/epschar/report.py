"""Suite reports: JSON serialisation and the figures rendered beside them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Check:
    name: str
    expected: object
    computed: object
    provenance: str                 # PAPER, DERIVED or TRIVIAL
    passed: bool
    repro: dict | None = None       # filled on failure: seeds, indices, inputs

    def as_dict(self) -> dict:
        d = {"name": self.name, "expected": self.expected, "computed": self.computed,
             "provenance": self.provenance, "passed": bool(self.passed)}
        if self.repro is not None and not self.passed:
            d["repro"] = self.repro
        return d


@dataclass
class Figure:
    """A grouped bar chart: one bar group per label, one bar per series."""

    name: str
    title: str
    labels: list
    series: dict                    # legend -> values aligned with labels
    ylabel: str = "count"
    log: bool = False


@dataclass
class Report:
    suite: str
    config_hash: str
    seed: int
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    figures: list = field(default_factory=list)
    wall_time: float = 0.0

    def add(self, name, expected, computed, provenance, passed=None, repro=None) -> Check:
        if passed is None:
            passed = expected == computed
        c = Check(name, expected, computed, provenance, bool(passed), repro)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {"suite": self.suite, "config_hash": self.config_hash, "seed": self.seed,
                "status": self.status, "checks": [c.as_dict() for c in self.checks],
                "data": self.data, "wall_time": round(self.wall_time, 3)}

    def summary_line(self) -> str:
        bad = self.failures()
        tail = "" if not bad else " failing: " + ", ".join(c.name for c in bad)
        return f"{self.suite}: {self.status.upper()} ({len(self.checks)} checks, {self.wall_time:.1f}s){tail}"


def to_json(reports: list[Report]) -> str:
    body = reports[0].as_dict() if len(reports) == 1 else {
        "status": "pass" if all(r.passed for r in reports) else "fail",
        "suites": [r.as_dict() for r in reports],
    }
    return json.dumps(body, indent=2, sort_keys=True, default=str) + "\n"


def render_figure(fig: Figure, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    labels = [str(x) for x in fig.labels]
    k = max(len(fig.series), 1)
    width = 0.8 / k
    pos = np.arange(len(labels))
    f, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(labels) + 2), 3.2))
    for j, (legend, values) in enumerate(fig.series.items()):
        ax.bar(pos + (j - (k - 1) / 2) * width, values, width, label=str(legend))
    ax.set_xticks(pos, labels, rotation=30 if len(labels) > 6 else 0, ha="right" if len(labels) > 6 else "center")
    ax.set_title(fig.title)
    ax.set_ylabel(fig.ylabel)
    if fig.log:
        ax.set_yscale("log")
    if len(fig.series) > 1:
        ax.legend(fontsize="small")
    f.tight_layout()
    f.savefig(path, metadata={"Software": None})
    plt.close(f)
    return path


def write(reports: list[Report], out: str | Path, plots: bool = True) -> list[Path]:
    """Write the JSON report to ``out`` and each figure next to it as PNG."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(to_json(reports))
    written = [out]
    if plots:
        for rep in reports:
            for fig in rep.figures:
                written.append(render_figure(fig, out.with_name(f"{out.stem}-{rep.suite}-{fig.name}.png")))
    return written
