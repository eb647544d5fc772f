"""Sample ingestion, replicate-weight export, and the variance report.

File formats
------------
Sample CSV: header exactly ``stratum,psu,weight,y``, one row per
observation, psu in {1, 2}, exactly two rows per stratum.  Strata keep
their order of first appearance; within a stratum the psu index fixes the
unit order regardless of row order.

Replicate CSV: header ``stratum,psu,weight,rw1..rwK``, one row per
observation; the weight column repeats the input weight so a round trip
through the file reproduces it exactly (floats are printed with shortest
round-trip repr).

Hadamard CSV: bare rows of comma-separated +1 / -1 entries, no header.

Variance report: versioned JSON; ``from_json(to_json(r))`` is lossless.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

from .design import Stratum, StratifiedSample, contrasts, total_estimate
from .dof import (
    DofRule,
    confidence_interval,
    ws_corrected,
    ws_from_jk_replicates,
)
from .errors import (
    DegenerateContrasts,
    DuplicatePsu,
    MissingPair,
    NonPositiveWeight,
    ParseError,
)
from .estimators import (
    variance_brr,
    variance_fay_brr,
    variance_jk1,
    variance_paired_jk,
)
from .hadamard import HadamardMatrix
from .replication import (
    BRR_FAMILY,
    ReplicateWeightTable,
    SchemeKind,
    SchemeSpec,
    brr_weights,
    jk1_weights,
    paired_jk_weights,
    replicate_estimates,
    zones_from_sample,
)

REPORT_SCHEMA_VERSION = 1

SAMPLE_HEADER = ("stratum", "psu", "weight", "y")

ASSUMPTION_NOTE = (
    "inference assumes E[d_h] = 0 in every stratum (as under simple random "
    "sampling within strata); this cannot be verified from a single sample"
)


def _parse_float(text: str, what: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"could not parse {what} {text!r} as a number", line=line) from None
    if not math.isfinite(value):
        raise ParseError(f"{what} must be finite, got {text!r}", line=line)
    return value


def parse_sample(path) -> StratifiedSample:
    """Read a two-PSU-per-stratum sample from CSV.

    Raises ParseError (malformed rows), DuplicatePsu, NonPositiveWeight,
    or MissingPair; every message carries the offending line number where
    one exists.
    """
    with open(path, newline="") as fh:
        return _parse_sample_rows(csv.reader(fh))


def _parse_sample_rows(rows) -> StratifiedSample:
    seen: dict[str, dict[int, tuple[float, float]]] = {}
    order: list[str] = []
    header_ok = False
    n_rows = 0
    for line, row in enumerate(rows, start=1):
        if not row:
            continue
        if not header_ok:
            if tuple(row) != SAMPLE_HEADER:
                raise ParseError(
                    f"expected header {','.join(SAMPLE_HEADER)!r}, got {','.join(row)!r}",
                    line=line,
                )
            header_ok = True
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", line=line)
        label, psu_text, weight_text, y_text = row
        if psu_text not in ("1", "2"):
            raise ParseError(f"psu must be 1 or 2, got {psu_text!r}", line=line)
        psu = int(psu_text)
        weight = _parse_float(weight_text, "weight", line)
        y = _parse_float(y_text, "y", line)
        if weight <= 0:
            raise NonPositiveWeight(
                f"stratum {label!r} psu {psu}: weight must be > 0, got {weight_text!r}",
                line=line,
            )
        units = seen.setdefault(label, {})
        if not units:
            order.append(label)
        if psu in units:
            raise DuplicatePsu(f"stratum {label!r} has a second psu={psu} row", line=line)
        units[psu] = (weight, y)
        n_rows += 1
    if not header_ok:
        raise ParseError("empty file: missing header")
    if n_rows == 0:
        raise ParseError("no data rows after the header")
    for label in order:
        units = seen[label]
        for psu in (1, 2):
            if psu not in units:
                raise MissingPair(f"stratum {label!r} is missing its psu={psu} row")
    return StratifiedSample(
        tuple(Stratum(label, (seen[label][1], seen[label][2])) for label in order)
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def write_replicates_csv(sample: StratifiedSample, table: ReplicateWeightTable, fh) -> None:
    """One row per observation: stratum, psu, full weight, then rw1..rwK.

    Works for every scheme; for jk1 the observations double as zones, in the
    same flattened order the table was built from.
    """
    writer = csv.writer(fh, lineterminator="\n")
    k = table.n_replicates
    writer.writerow(list(SAMPLE_HEADER[:3]) + [f"rw{r + 1}" for r in range(k)])
    col = 0
    for stratum in sample.strata:
        for psu, (weight, _y) in enumerate(stratum.obs, start=1):
            writer.writerow(
                [stratum.label, psu, _fmt(weight)] + [_fmt(w) for w in table.weights[:, col]]
            )
            col += 1


def write_hadamard_csv(matrix: HadamardMatrix, fh) -> None:
    """Bare ±1 entries, one matrix row per line."""
    for row in matrix.entries:
        fh.write(",".join(str(int(v)) for v in row) + "\n")


@dataclass(frozen=True)
class VarianceReport:
    """End-to-end estimate for one sample and scheme, JSON round-trippable.

    ``dof`` is None when every contrast is zero (degrees of freedom are then
    undefined); the interval degenerates to a zero-width point in that case.
    ``ci.dof_used`` is None for the normal rule (infinite df) and in the
    degenerate case.
    """

    total: float
    variance: dict
    contrasts: list | None
    dof: dict | None
    ci: dict
    scheme: dict
    n_components: int
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "total": self.total,
            "variance": self.variance,
            "contrasts": self.contrasts,
            "dof": self.dof,
            "ci": self.ci,
            "scheme": self.scheme,
            "n_components": self.n_components,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VarianceReport":
        version = data.get("schema_version")
        if version != REPORT_SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema_version {version!r}")
        return cls(
            total=data["total"],
            variance=data["variance"],
            contrasts=data["contrasts"],
            dof=data["dof"],
            ci=data["ci"],
            scheme=data["scheme"],
            n_components=data["n_components"],
            warnings=tuple(data["warnings"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "VarianceReport":
        return cls.from_dict(json.loads(text))


def _interval_dict(ci, dof_rule: DofRule) -> dict:
    dof_used = ci.dof_used
    return {
        "center": ci.center,
        "half_width": ci.half_width,
        "lower": ci.lower,
        "upper": ci.upper,
        "level": ci.level,
        "dof_used": None if dof_used is None or math.isinf(dof_used) else dof_used,
        "dof_rule": dof_rule.value,
    }


def build_report(
    sample: StratifiedSample,
    spec: SchemeSpec,
    level: float = 0.95,
    dof_rule: DofRule = DofRule.CORRECTED,
    cap_at_h: bool = False,
) -> VarianceReport:
    """Run the whole pipeline on one sample and assemble the report.

    The reported variance is the canonical contrast-path value, identical
    across schemes by construction; the replicate-path value is carried
    alongside (the constructor has already required them to agree).
    ``cap_at_h`` additionally caps the corrected df at the component count,
    which the formula itself does not do.
    """
    dof_rule = DofRule(dof_rule)
    total = total_estimate(sample)
    warnings = [ASSUMPTION_NOTE]
    if spec.kind is SchemeKind.JK1:
        zones = zones_from_sample(sample)
        table = jk1_weights(zones, spec)
        est = replicate_estimates(zones, table)
        variance = variance_jk1(est, zones.n_zones)
        contrast_list = None
        n_components = zones.n_zones
        try:
            dof = ws_from_jk_replicates(est.deviations)
        except DegenerateContrasts:
            dof = None
    else:
        d = contrasts(sample)
        if spec.kind in BRR_FAMILY:
            table = brr_weights(sample, spec)
            est = replicate_estimates(sample, table)
            if spec.kind is SchemeKind.BRR:
                variance = variance_brr(est, table.n_replicates, d)
            else:
                variance = variance_fay_brr(est, table.n_replicates, spec.epsilon, d)
        else:
            table = paired_jk_weights(sample, spec)
            est = replicate_estimates(sample, table)
            variance = variance_paired_jk(est, spec.epsilon, d)
        contrast_list = [
            {"stratum": s.label, "d": float(d[h])} for h, s in enumerate(sample.strata)
        ]
        n_components = sample.n_strata
        try:
            dof = ws_corrected(d)
        except DegenerateContrasts:
            dof = None

    if dof is None:
        what = "replicate deviations" if spec.kind is SchemeKind.JK1 else "stratum contrasts"
        warnings.append(
            f"all {what} are zero: the variance estimate is 0, degrees of freedom "
            "are undefined, and the interval degenerates to a point"
        )
        ci_dict = {
            "center": total,
            "half_width": 0.0,
            "lower": total,
            "upper": total,
            "level": float(level),
            "dof_used": None,
            "dof_rule": dof_rule.value,
        }
    else:
        if dof_rule is DofRule.CORRECTED:
            dof_value = dof.corrected_clamped
            if cap_at_h:
                dof_value = min(dof_value, float(n_components))
        elif dof_rule is DofRule.NAIVE:
            dof_value = dof.naive
        elif dof_rule is DofRule.FIXED_H:
            dof_value = float(n_components)
        else:
            dof_value = math.inf
        ci = confidence_interval(total, variance, dof, level, dof_value=dof_value)
        ci_dict = _interval_dict(ci, dof_rule)

    return VarianceReport(
        total=total,
        variance={
            "value": variance.canonical,
            "via_replicates": variance.via_replicates,
            "via_contrasts": variance.via_contrasts,
        },
        contrasts=contrast_list,
        dof=None
        if dof is None
        else {
            "naive": dof.naive,
            "corrected": dof.corrected,
            "corrected_clamped": dof.corrected_clamped,
            "basis": dof.basis.value,
        },
        ci=ci_dict,
        scheme={
            "kind": table.scheme.kind.value,
            "epsilon": table.scheme.epsilon,
            "n_replicates": table.n_replicates,
            "hadamard_order": table.scheme.hadamard_order,
        },
        n_components=n_components,
        warnings=tuple(warnings),
    )
