"""Batch evaluation of manual vs semiautomatic segmentations from a CSV
manifest, producing summary tables, test statistics, and an inter-operator
agreement figure.

Manifest format (header row required, mask paths relative to the manifest's
directory):

    lesion_id,manual_mask,semi_mask,time_manual_s,time_semi_s,satisfied
    [,manual_mask_2,semi_mask_2,time_manual_2_s,time_semi_2_s,satisfied_2]
    [,spacing_mm]

``satisfied`` accepts 1/0, true/false, yes/no. When the second-reader
columns are present, the report adds the intraclass correlation of the two
readers' overlap scores on lesions both marked satisfied.

The primary tables cover satisfied records only; every report also carries
an all-records variant. Reports are a pure function of the manifest plus the
bootstrap seed recorded in their header.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .evaluation import (
    EvalRecord,
    SummaryStats,
    dice,
    hausdorff,
    icc_absolute_agreement,
    one_sample_ttest,
    summarize,
    wilcoxon_rank_sum,
)
from .imaging import load_mask
from .segmenter import diameters_of_points
from .evaluation import boundary_points


class ManifestError(ValueError):
    token = "bad-manifest"


_TRUE = {"1", "true", "yes", "y"}
_FALSE = {"0", "false", "no", "n"}

REQUIRED_COLUMNS = (
    "lesion_id",
    "manual_mask",
    "semi_mask",
    "time_manual_s",
    "time_semi_s",
    "satisfied",
)
READER2_COLUMNS = (
    "manual_mask_2",
    "semi_mask_2",
    "time_manual_2_s",
    "time_semi_2_s",
    "satisfied_2",
)

TIMES_HEADER = ["metric", "n", "median", "q1", "q3", "min", "max"]
OVERLAP_HEADER = ["metric", "n", "median", "ci95_low", "ci95_high", "min", "max"]


def _parse_bool(text: str, where: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ManifestError(f"{where}: cannot parse boolean {text!r}")


@dataclass(frozen=True)
class ManifestRow:
    lesion_id: str
    manual_mask: Path
    semi_mask: Path
    time_manual_s: float
    time_semi_s: float
    satisfied: bool
    manual_mask_2: Path | None = None
    semi_mask_2: Path | None = None
    time_manual_2_s: float | None = None
    time_semi_2_s: float | None = None
    satisfied_2: bool | None = None
    spacing_mm: float | None = None


def read_manifest(path) -> list[ManifestRow]:
    path = Path(path)
    base = path.parent
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ManifestError(f"{path}: empty manifest")
            missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
            if missing:
                raise ManifestError(f"{path}: missing columns {missing}")
            has_reader2 = all(c in reader.fieldnames for c in READER2_COLUMNS)
            rows = []
            for line_no, raw in enumerate(reader, start=2):
                where = f"{path}:{line_no}"
                try:
                    row = ManifestRow(
                        lesion_id=raw["lesion_id"].strip(),
                        manual_mask=base / raw["manual_mask"].strip(),
                        semi_mask=base / raw["semi_mask"].strip(),
                        time_manual_s=float(raw["time_manual_s"]),
                        time_semi_s=float(raw["time_semi_s"]),
                        satisfied=_parse_bool(raw["satisfied"], where),
                        manual_mask_2=base / raw["manual_mask_2"].strip() if has_reader2 else None,
                        semi_mask_2=base / raw["semi_mask_2"].strip() if has_reader2 else None,
                        time_manual_2_s=float(raw["time_manual_2_s"]) if has_reader2 else None,
                        time_semi_2_s=float(raw["time_semi_2_s"]) if has_reader2 else None,
                        satisfied_2=_parse_bool(raw["satisfied_2"], where) if has_reader2 else None,
                        spacing_mm=float(raw["spacing_mm"]) if raw.get("spacing_mm") else None,
                    )
                except (KeyError, ValueError) as exc:
                    if isinstance(exc, ManifestError):
                        raise
                    raise ManifestError(f"{where}: {exc}") from exc
                rows.append(row)
    except OSError as exc:
        raise ManifestError(f"{path}: cannot read manifest ({exc})") from exc
    if not rows:
        raise ManifestError(f"{path}: manifest has no data rows")
    return rows


def _mask_diameters(mask) -> tuple[float, float]:
    pts = boundary_points(mask)
    if pts.shape[0] < 2:
        return 0.0, 0.0
    a, _, b, _ = diameters_of_points(pts)
    return a, b


def build_record(
    row: ManifestRow, manual_path: Path, semi_path: Path, time_manual: float,
    time_semi: float, satisfied: bool,
) -> EvalRecord:
    """Compare one manual/semiautomatic mask pair.

    Diameter differences are in millimeters when the row carries spacing,
    else in pixels; Hausdorff stays in pixels either way.
    """
    manual = load_mask(manual_path)
    semi = load_mask(semi_path)
    if manual.bits.shape != semi.bits.shape:
        raise ManifestError(
            f"{row.lesion_id}: mask dimensions differ "
            f"({manual.width}x{manual.height} vs {semi.width}x{semi.height})"
        )
    scale = row.spacing_mm if row.spacing_mm else 1.0
    man_a, man_b = _mask_diameters(manual)
    semi_a, semi_b = _mask_diameters(semi)
    return EvalRecord(
        lesion_id=row.lesion_id,
        dsc=dice(manual, semi),
        hd=hausdorff(manual, semi),
        diam_a_diff=abs(man_a - semi_a) * scale,
        diam_b_diff=abs(man_b - semi_b) * scale,
        time_manual=time_manual,
        time_semi=time_semi,
        satisfied=satisfied,
    )


@dataclass(frozen=True)
class TestOutcomes:
    wilcoxon_u: float
    wilcoxon_p: float
    ttest_t: float | None
    ttest_p: float | None


@dataclass(frozen=True)
class ReportTables:
    """Summary block over one record subset."""

    n: int
    times: dict[str, SummaryStats]
    overlap: dict[str, SummaryStats]
    diameters: dict[str, SummaryStats]
    tests: TestOutcomes | None


@dataclass(frozen=True)
class StudyReport:
    bootstrap_seed: int
    record_count: int
    satisfied_count: int
    satisfied_only: ReportTables
    all_records: ReportTables
    icc: float | None
    icc_note: str | None
    diam_units: str


def _tables(records: list[EvalRecord], seed: int) -> ReportTables:
    if not records:
        return ReportTables(0, {}, {}, {}, None)
    manual = [r.time_manual for r in records]
    semi = [r.time_semi for r in records]
    times = {
        "time_manual_s": summarize(manual, rng_seed=seed),
        "time_semi_s": summarize(semi, rng_seed=seed),
    }
    overlap = {
        "dsc": summarize([r.dsc for r in records], rng_seed=seed),
        "hd_px": summarize([r.hd for r in records], rng_seed=seed),
    }
    diameters = {
        "diam_a_diff": summarize([r.diam_a_diff for r in records], rng_seed=seed),
        "diam_b_diff": summarize([r.diam_b_diff for r in records], rng_seed=seed),
    }
    wu, wp = wilcoxon_rank_sum(manual, semi)
    diffs = np.array(manual) - np.array(semi)
    if len(records) >= 2 and diffs.std(ddof=1) > 0:
        tt, tp = one_sample_ttest(diffs, 0.0)
    else:
        tt = tp = None
    return ReportTables(len(records), times, overlap, diameters, TestOutcomes(wu, wp, tt, tp))


def compile_report(rows: list[ManifestRow], bootstrap_seed: int = 0) -> StudyReport:
    records = [
        build_record(r, r.manual_mask, r.semi_mask, r.time_manual_s, r.time_semi_s, r.satisfied)
        for r in rows
    ]
    satisfied = [r for r in records if r.satisfied]

    icc = None
    icc_note = None
    has_reader2 = all(r.manual_mask_2 is not None for r in rows)
    if has_reader2:
        pairs = []
        for row, rec in zip(rows, records):
            if not (rec.satisfied and row.satisfied_2):
                continue
            rec2 = build_record(
                row, row.manual_mask_2, row.semi_mask_2,
                row.time_manual_2_s, row.time_semi_2_s, row.satisfied_2,
            )
            pairs.append((rec.dsc, rec2.dsc))
        if len(pairs) >= 3:
            icc = icc_absolute_agreement(np.array(pairs))
        else:
            icc_note = (
                f"ICC omitted: only {len(pairs)} lesions satisfied by both readers (need >= 3)"
            )
    else:
        icc_note = "ICC omitted: manifest has no second-reader columns"

    diam_units = "mm" if all(r.spacing_mm for r in rows) else "px"
    return StudyReport(
        bootstrap_seed=bootstrap_seed,
        record_count=len(records),
        satisfied_count=len(satisfied),
        satisfied_only=_tables(satisfied, bootstrap_seed),
        all_records=_tables(records, bootstrap_seed),
        icc=icc,
        icc_note=icc_note,
        diam_units=diam_units,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _quartile_rows(stats: dict[str, SummaryStats]):
    for metric, s in stats.items():
        yield [metric, s.n, s.median, s.q1, s.q3, s.min, s.max]


def _ci_rows(stats: dict[str, SummaryStats]):
    for metric, s in stats.items():
        yield [metric, s.n, s.median, s.ci_low, s.ci_high, s.min, s.max]


def write_report_csv(report: StudyReport, out_dir) -> dict[str, Path]:
    """Write the fixed-column CSV tables; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}

    def emit(name: str, header: list[str], rows) -> None:
        path = out_dir / name
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        written[name] = path

    for suffix, tables in (("", report.satisfied_only), ("_all", report.all_records)):
        emit(f"times{suffix}.csv", TIMES_HEADER, _quartile_rows(tables.times))
        emit(f"overlap{suffix}.csv", OVERLAP_HEADER, _ci_rows(tables.overlap))
        emit(f"diameters{suffix}.csv", TIMES_HEADER, _quartile_rows(tables.diameters))

    rows = [
        ["bootstrap_seed", report.bootstrap_seed],
        ["record_count", report.record_count],
        ["satisfied_count", report.satisfied_count],
        ["diam_units", report.diam_units],
    ]
    tests = report.satisfied_only.tests
    if tests is not None:
        rows += [
            ["wilcoxon_time_u", tests.wilcoxon_u],
            ["wilcoxon_time_p", tests.wilcoxon_p],
            ["ttest_time_t", tests.ttest_t if tests.ttest_t is not None else ""],
            ["ttest_time_p", tests.ttest_p if tests.ttest_p is not None else ""],
        ]
    rows.append(["icc_dsc", report.icc if report.icc is not None else ""])
    if report.icc_note:
        rows.append(["icc_note", report.icc_note])
    emit("tests.csv", ["name", "value"], rows)
    return written


def render_report_text(report: StudyReport) -> str:
    """Human-readable report with the same content as the CSV tables."""
    lines = [
        "Segmentation study report",
        f"bootstrap_seed={report.bootstrap_seed}",
        f"records={report.record_count} satisfied={report.satisfied_count}",
        f"diameter differences in {report.diam_units}",
        "",
    ]

    def block(title: str, tables: ReportTables) -> None:
        lines.append(f"== {title} (n={tables.n}) ==")
        if tables.n == 0:
            lines.append("  (no records)")
            lines.append("")
            return
        lines.append("  times (s): metric median q1 q3 min max")
        for metric, s in tables.times.items():
            lines.append(
                f"    {metric:16s} {s.median:8.3f} {s.q1:8.3f} {s.q3:8.3f} {s.min:8.3f} {s.max:8.3f}"
            )
        lines.append("  overlap: metric median ci95 min max")
        for metric, s in tables.overlap.items():
            lines.append(
                f"    {metric:16s} {s.median:8.3f} [{s.ci_low:.3f}, {s.ci_high:.3f}] "
                f"{s.min:8.3f} {s.max:8.3f}"
            )
        lines.append("  diameter differences: metric median q1 q3 min max")
        for metric, s in tables.diameters.items():
            lines.append(
                f"    {metric:16s} {s.median:8.3f} {s.q1:8.3f} {s.q3:8.3f} {s.min:8.3f} {s.max:8.3f}"
            )
        if tables.tests is not None:
            t = tables.tests
            lines.append(f"  rank-sum test (manual vs semi time): U={t.wilcoxon_u:.1f} p={t.wilcoxon_p:.6g}")
            if t.ttest_p is not None:
                lines.append(f"  one-sample t-test (time difference vs 0): t={t.ttest_t:.4f} p={t.ttest_p:.6g}")
        lines.append("")

    block("satisfied only", report.satisfied_only)
    block("all records", report.all_records)

    if report.icc is not None:
        lines.append(f"inter-operator ICC of overlap scores: {report.icc:.4f}")
    if report.icc_note:
        lines.append(report.icc_note)
    lines.append("")
    return "\n".join(lines)


def evaluate_manifest(manifest_path, out_dir, bootstrap_seed: int = 0) -> StudyReport:
    """cli entry: read manifest, compile the report, write CSV + text."""
    rows = read_manifest(manifest_path)
    report = compile_report(rows, bootstrap_seed=bootstrap_seed)
    out_dir = Path(out_dir)
    write_report_csv(report, out_dir)
    (out_dir / "report.txt").write_text(render_report_text(report))
    return report
