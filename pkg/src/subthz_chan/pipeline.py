"""Full analysis pipeline: ingest a campaign, fit everything, write reports.

The report bundle is a pure function of the input files and the run
configuration: no timestamps, no absolute paths, stable ordering, fixed
numeric formatting.  Running twice on the same inputs yields
byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .angular import AngularSummary, campaign_angular_summary
from .campaign_io import ingest_campaign
from .delay import DelaySummary, campaign_delay_summary
from .measurement import (
    DEFAULT_DELAY_RESOLUTION_NS,
    LocationMeasurement,
    NoSignalError,
    Polarization,
    ValidationError,
)
from .pathloss import (
    CiFit,
    DegenerateFitError,
    PathLossSample,
    SampleKind,
    directional_path_loss,
    fit_ci,
    fit_cix,
    omni_path_loss,
)
from .summary import SummaryRow
from .xpd import PathClass, XpdClassSummary, collect_xpds, xpd_summary

logger = logging.getLogger(__name__)

REPORT_JSON = "report.json"
DELAY_CSV = "delay_stats.csv"
ANGULAR_CSV = "angular_stats.csv"
XPD_CSV = "xpd_cdf.csv"
SCATTER_CSV = "pathloss_scatter.csv"

_KNOWN_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    """Configuration of one pipeline run.

    ``carrier_hz`` of None means "use the carrier recorded in the
    manifest"; the explicit default pins the usual band instead.
    """

    manifest_path: Path
    out_dir: Path
    thresholds_db: tuple[float, ...] = (20.0, 30.0)
    carrier_hz: float | None = 142e9
    seed: int = 0
    formats: tuple[str, ...] = ("csv", "json")
    max_measurable_pl_db: float | None = 152.0
    delay_resolution_ns: float = DEFAULT_DELAY_RESOLUTION_NS

    def __post_init__(self):
        object.__setattr__(self, "manifest_path", Path(self.manifest_path))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        object.__setattr__(self, "thresholds_db", tuple(float(t) for t in self.thresholds_db))
        object.__setattr__(self, "formats", tuple(str(f) for f in self.formats))
        if not self.thresholds_db:
            raise ValidationError("thresholds_db", "need at least one threshold")
        if any(t <= 0 for t in self.thresholds_db):
            raise ValidationError("thresholds_db", f"thresholds must be > 0, got {self.thresholds_db}")
        if not self.formats:
            raise ValidationError("formats", "need at least one output format")
        unknown = set(self.formats) - set(_KNOWN_FORMATS)
        if unknown:
            raise ValidationError("formats", f"unknown formats: {sorted(unknown)}")
        if self.carrier_hz is not None and self.carrier_hz <= 0:
            raise ValidationError("carrier_hz", f"must be > 0, got {self.carrier_hz}")
        if self.seed < 0:
            raise ValidationError("seed", f"must be >= 0, got {self.seed}")


def _summary_row_dict(row: SummaryRow) -> dict:
    return {
        "n": row.n,
        "min": row.min,
        "max": row.max,
        "mean": row.mean,
        "median": row.median,
        "p90": row.p90,
    }


def _ci_dict(fit: CiFit | None) -> dict | None:
    if fit is None:
        return None
    return {
        "ple": fit.ple,
        "sigma_db": fit.sigma_db,
        "n_samples": fit.n_samples,
        "fspl_anchor_db": fit.fspl_anchor_db,
    }


def _input_digests(manifest_path: Path) -> dict[str, str]:
    """SHA-256 of the manifest and every sweep file it references.

    Keys are the manifest's own name and the sweep paths exactly as the
    manifest spells them, so the digest map carries no absolute paths.
    """
    digests = {manifest_path.name: hashlib.sha256(manifest_path.read_bytes()).hexdigest()}
    doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    for entry in doc.get("locations", []):
        rel = entry.get("sweeps")
        if isinstance(rel, str) and rel not in digests:
            sweep_path = manifest_path.parent / rel
            digests[rel] = hashlib.sha256(sweep_path.read_bytes()).hexdigest()
    return digests


def _csv_value(value: float) -> str:
    return f"{value:.4f}"


def _summary_csv_line(label: str, row: SummaryRow) -> str:
    return ",".join(
        [label] + [_csv_value(v) for v in (row.min, row.max, row.mean, row.median, row.p90)]
    )


def _delay_csv(summaries: Mapping[float, DelaySummary]) -> str:
    lines = ["statistic,min,max,mean,median,p90"]
    for label, pick in (
        ("Omni RMSDS", lambda s: s.omni_rmsds),
        ("Omni MDS", lambda s: s.omni_mds),
        ("Dir RMSDS", lambda s: s.dir_rmsds),
        ("Dir MDS", lambda s: s.dir_mds),
    ):
        for t, summary in summaries.items():
            lines.append(_summary_csv_line(f"{label}-{t:g} dB", pick(summary)))
    return "\n".join(lines) + "\n"


def _angular_csv(summaries: Mapping[float, AngularSummary]) -> str:
    lines = ["statistic,min,max,mean,median,p90"]
    for label, pick in (
        ("AOA lobes", lambda s: s.n_aoa_lobes),
        ("AOD lobes", lambda s: s.n_aod_lobes),
        ("AOA RMSAS", lambda s: s.aoa_rmsas),
        ("AOD RMSAS", lambda s: s.aod_rmsas),
    ):
        for t, summary in summaries.items():
            lines.append(_summary_csv_line(f"{label}-{t:g} dB", pick(summary)))
    return "\n".join(lines) + "\n"


def _xpd_csv(summary: Mapping[PathClass, XpdClassSummary]) -> str:
    lines = ["path_class,xpd_db,cdf"]
    for path_class in (PathClass.BORESIGHT, PathClass.REFLECTION):
        if path_class not in summary:
            continue
        for value, cdf in summary[path_class].cdf:
            lines.append(f"{path_class.value},{_csv_value(value)},{_csv_value(cdf)}")
    return "\n".join(lines) + "\n"


def _scatter_csv(samples: list[PathLossSample]) -> str:
    lines = ["kind,polarization,los,distance_m,pl_db"]
    order = {kind: i for i, kind in enumerate(SampleKind)}
    for s in sorted(samples, key=lambda s: (order[s.kind], s.polarization.value, s.distance_m, s.pl_db)):
        lines.append(
            f"{s.kind.value},{s.polarization.value},{str(s.los).lower()},"
            f"{_csv_value(s.distance_m)},{_csv_value(s.pl_db)}"
        )
    return "\n".join(lines) + "\n"


def run_pipeline(config: RunConfig) -> tuple[Path, ...]:
    """Run ingest, fits, summaries, and XPD analysis; write the report bundle.

    Returns the written file paths.  Locations without detectable signal
    (or beyond the measurable path-loss ceiling) are excluded from the
    path-loss fits and listed in the JSON report.
    """
    campaign = ingest_campaign(config.manifest_path, config.delay_resolution_ns)
    carrier = config.carrier_hz if config.carrier_hz is not None else campaign.carrier_hz
    logger.info(
        "ingested campaign %s: %d locations, carrier %.3f GHz",
        campaign.campaign_id, len(campaign), carrier / 1e9,
    )

    vv_locs = campaign.by_polarization(Polarization.VV)
    vh_locs = campaign.by_polarization(Polarization.VH)

    excluded: list[dict] = []
    scatter: list[PathLossSample] = []

    def omni_samples(locs: tuple[LocationMeasurement, ...]) -> list[PathLossSample]:
        out = []
        for loc in locs:
            try:
                out.append(omni_path_loss(loc, config.max_measurable_pl_db))
            except NoSignalError as err:
                logger.warning("excluding %s-%s (%s): %s", loc.tx_id, loc.rx_id, loc.polarization.value, err)
                excluded.append(
                    {
                        "tx_id": loc.tx_id,
                        "rx_id": loc.rx_id,
                        "polarization": loc.polarization.value,
                        "reason": str(err),
                    }
                )
        return out

    vv_omni = omni_samples(vv_locs)
    vh_omni = omni_samples(vh_locs)
    if len(vv_omni) < 2:
        raise DegenerateFitError(
            f"only {len(vv_omni)} co-polarized locations usable; cannot fit the co-polar model"
        )
    ci_vv = fit_ci(vv_omni, carrier)
    ci_vh = fit_ci(vh_omni, carrier) if len(vh_omni) >= 2 else None
    cix = fit_cix(vh_omni, ci_vv, carrier) if vh_omni else None
    scatter.extend(vv_omni)
    scatter.extend(vh_omni)

    directional: dict[SampleKind, list[PathLossSample]] = {
        SampleKind.DIR_B: [],
        SampleKind.DIR_NBB: [],
        SampleKind.DIR_NB: [],
    }
    for loc in vv_locs:
        try:
            for sample in directional_path_loss(loc, config.max_measurable_pl_db):
                directional[sample.kind].append(sample)
        except NoSignalError:
            continue
    directional_fits = {
        kind: fit_ci(samples, carrier) if len(samples) >= 2 else None
        for kind, samples in directional.items()
    }
    for samples in directional.values():
        scatter.extend(samples)

    delay_summaries = {t: campaign_delay_summary(vv_locs, t) for t in config.thresholds_db}
    angular_summaries = {t: campaign_angular_summary(vv_locs, t) for t in config.thresholds_db}

    xpds = collect_xpds(campaign.paired_locations())
    xpd_by_class = xpd_summary(xpds)

    config.out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "json" in config.formats:
        payload = {
            "campaign": {
                "id": campaign.campaign_id,
                "carrier_hz": campaign.carrier_hz,
                "tx_power_dbm": campaign.tx_power_dbm,
                "n_locations": len(campaign),
                "n_vv": len(vv_locs),
                "n_vh": len(vh_locs),
            },
            "config": {
                "manifest": config.manifest_path.name,
                "thresholds_db": list(config.thresholds_db),
                "carrier_hz": carrier,
                "max_measurable_pl_db": config.max_measurable_pl_db,
                "delay_resolution_ns": config.delay_resolution_ns,
                "seed": config.seed,
                "formats": sorted(config.formats),
            },
            "inputs_sha256": _input_digests(config.manifest_path),
            "excluded_locations": excluded,
            "pathloss": {
                "omni_vv": _ci_dict(ci_vv),
                "omni_vh": _ci_dict(ci_vh),
                "cross_polar": None
                if cix is None
                else {
                    "xpd_db": cix.xpd_db,
                    "sigma_db": cix.sigma_db,
                    "ple_vv": cix.ple_vv,
                    "n_samples": cix.n_samples,
                },
                "directional_vv": {
                    "B": _ci_dict(directional_fits[SampleKind.DIR_B]),
                    "NBB": _ci_dict(directional_fits[SampleKind.DIR_NBB]),
                    "NB": _ci_dict(directional_fits[SampleKind.DIR_NB]),
                },
            },
            "delay": {
                f"{t:g}": {
                    "omni_rmsds": _summary_row_dict(s.omni_rmsds),
                    "omni_mds": _summary_row_dict(s.omni_mds),
                    "dir_rmsds": _summary_row_dict(s.dir_rmsds),
                    "dir_mds": _summary_row_dict(s.dir_mds),
                }
                for t, s in delay_summaries.items()
            },
            "angular": {
                f"{t:g}": {
                    "n_aoa_lobes": _summary_row_dict(s.n_aoa_lobes),
                    "n_aod_lobes": _summary_row_dict(s.n_aod_lobes),
                    "aoa_rmsas": _summary_row_dict(s.aoa_rmsas),
                    "aod_rmsas": _summary_row_dict(s.aod_rmsas),
                }
                for t, s in angular_summaries.items()
            },
            "xpd": {
                path_class.value: {
                    "mean_db": summary.mean_db,
                    "std_db": summary.std_db,
                    "n": summary.n,
                }
                for path_class, summary in sorted(xpd_by_class.items(), key=lambda kv: kv[0].value)
            },
        }
        report_path = config.out_dir / REPORT_JSON
        report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(report_path)

    if "csv" in config.formats:
        for name, text in (
            (DELAY_CSV, _delay_csv(delay_summaries)),
            (ANGULAR_CSV, _angular_csv(angular_summaries)),
            (XPD_CSV, _xpd_csv(xpd_by_class)),
            (SCATTER_CSV, _scatter_csv(scatter)),
        ):
            path = config.out_dir / name
            path.write_text(text, encoding="utf-8")
            written.append(path)

    logger.info("wrote %d report files to %s", len(written), config.out_dir)
    return tuple(written)
