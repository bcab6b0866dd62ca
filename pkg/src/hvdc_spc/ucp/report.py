"""Market outcome tables per area and percentage comparisons between runs."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .prices import MarketReport

TABLE_ROWS = ("reserve_cost", "energy_cost", "total_cost", "generator_revenue", "load_payment", "hvdc_revenue")
DEFAULT_BASELINE = "no_spc"


class ReportError(ValueError):
    pass


def market_table(market: MarketReport, rows=TABLE_ROWS) -> dict[str, dict[str, float]]:
    """row -> {area: value, ..., "total": value}."""
    out = {}
    for row in rows:
        vals = {a: float(market.areas[a][row]) for a in sorted(market.areas)}
        vals["total"] = sum(vals.values())
        out[row] = vals
    return out


def pct_delta(value: float, base: float) -> float | None:
    if base == 0:
        return 0.0 if value == 0 else None
    return 100.0 * (value - base) / abs(base)


@dataclass
class Comparison:
    system: str
    labels: list[str]
    baseline: str | None
    tables: dict[str, dict[str, dict[str, float]]]  # label -> row -> column -> value
    columns: list[str] = field(default_factory=list)  # area ids plus "total"

    def delta(self, label: str, row: str, col: str) -> float | None:
        if self.baseline is None:
            raise ReportError("no baseline in a single-run report")
        return pct_delta(self.tables[label][row][col], self.tables[self.baseline][row][col])

    def records(self) -> list[dict]:
        out = []
        for row in TABLE_ROWS:
            for col in self.columns:
                rec = {"row": row, "area": col}
                for lab in self.labels:
                    rec[lab] = self.tables[lab][row][col]
                if self.baseline is not None:
                    for lab in self.labels:
                        if lab != self.baseline:
                            rec[f"{lab}_delta_pct"] = self.delta(lab, row, col)
                out.append(rec)
        return out

    def header(self) -> list[str]:
        head = ["row", "area", *self.labels]
        if self.baseline is not None:
            head += [f"{lab}_delta_pct" for lab in self.labels if lab != self.baseline]
        return head

    def write(self, out_dir: str | Path, stem: str = "comparison") -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        recs = self.records()
        p_csv = out_dir / f"{stem}.csv"
        with p_csv.open("w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=self.header())
            w.writeheader()
            for r in recs:
                w.writerow({k: ("" if v is None else v if isinstance(v, str) else repr(v)) for k, v in r.items()})
        p_json = out_dir / f"{stem}.json"
        doc = {"system": self.system, "labels": self.labels, "baseline": self.baseline, "rows": recs}
        p_json.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return [p_csv, p_json]


def _labels(markets: list[MarketReport]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for m in markets:
        n = seen.get(m.mode, 0) + 1
        seen[m.mode] = n
        out.append(m.mode if n == 1 else f"{m.mode}#{n}")
    return out


def compare(markets: list[MarketReport], baseline: str | None = None,
            labels: list[str] | None = None) -> Comparison:
    """Side-by-side table; with two or more runs, deltas are taken against ``baseline``.

    The default baseline is the ``no_spc`` run when present, otherwise the first run.
    """
    if not markets:
        raise ReportError("nothing to compare")
    systems = {m.system for m in markets}
    if len(systems) > 1:
        raise ReportError(f"runs belong to different systems: {', '.join(sorted(systems))}")
    areas = {tuple(sorted(m.areas)) for m in markets}
    if len(areas) > 1:
        raise ReportError("runs cover different areas")
    labels = labels or _labels(markets)
    if len(set(labels)) != len(labels):
        raise ReportError("run labels must be unique")
    tables = {lab: market_table(m) for lab, m in zip(labels, markets)}
    base = None
    if len(markets) > 1:
        if baseline is None:
            base = DEFAULT_BASELINE if DEFAULT_BASELINE in labels else labels[0]
        elif baseline in labels:
            base = baseline
        else:
            raise ReportError(f"baseline '{baseline}' is not among the runs ({', '.join(labels)})")
    return Comparison(markets[0].system, labels, base, tables, [*sorted(markets[0].areas), "total"])
