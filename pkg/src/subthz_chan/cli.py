"""Command-line entry point for campaign analysis and synthesis.

Exit codes: 0 success, 2 validation or data-format failure, 3 degenerate
fit, 4 I/O failure.  The ``SUBTHZ_CHAN_LOG`` environment variable sets
the log level (DEBUG, INFO, WARNING, ...).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from .angular import Side, campaign_angular_summary, power_angular_spectrum
from .campaign_io import ingest_campaign
from .delay import campaign_delay_summary
from .measurement import (
    DEFAULT_DELAY_RESOLUTION_NS,
    NoSignalError,
    Polarization,
    ValidationError,
)
from .pathloss import DegenerateFitError, SampleKind, collect_samples, fit_ci, fit_cix
from .pipeline import (
    RunConfig,
    _angular_csv,
    _delay_csv,
    _xpd_csv,
    run_pipeline,
)
from .synthesis import SynthesisParams, factory_campaign_layout, render_campaign
from .xpd import collect_xpds, xpd_summary

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERATE_FIT = 3
EXIT_IO = 4

_KIND_FLAGS = {
    "omni": SampleKind.OMNI,
    "B": SampleKind.DIR_B,
    "NBB": SampleKind.DIR_NBB,
    "NB": SampleKind.DIR_NB,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subthz-chan",
        description="Sub-THz channel-sounder campaign analysis and synthesis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_manifest(p):
        p.add_argument("--manifest", type=Path, required=True, help="campaign manifest JSON")

    def add_thresholds(p):
        p.add_argument(
            "--threshold-db",
            type=float,
            action="append",
            help="threshold below peak in dB; repeatable (default 20 and 30)",
        )

    def add_out(p, required=False):
        p.add_argument("--out", type=Path, required=required, help="output file or directory")

    p_ingest = sub.add_parser("ingest", help="validate a campaign and summarize it")
    add_manifest(p_ingest)
    p_ingest.add_argument("--delay-resolution-ns", type=float, default=DEFAULT_DELAY_RESOLUTION_NS)
    p_ingest.add_argument("--format", choices=("text", "json"), default="text")

    p_fit = sub.add_parser("fit", help="fit path-loss models")
    fit_sub = p_fit.add_subparsers(dest="fit_target", required=True)
    p_fit_pl = fit_sub.add_parser("pathloss", help="close-in exponent fit on one sample class")
    add_manifest(p_fit_pl)
    p_fit_pl.add_argument("--pol", choices=[p.value for p in Polarization], default="VV")
    p_fit_pl.add_argument("--kind", choices=sorted(_KIND_FLAGS), default="omni")
    p_fit_pl.add_argument("--carrier-hz", type=float, default=None, help="override the manifest carrier")
    p_fit_pl.add_argument(
        "--max-pl-db",
        type=float,
        default=152.0,
        help="measurable path-loss ceiling; non-positive disables it",
    )
    p_fit_pl.add_argument("--scatter-csv", type=Path, default=None, help="also write distance/loss pairs here")

    p_stats = sub.add_parser("stats", help="campaign summary tables")
    stats_sub = p_stats.add_subparsers(dest="stats_kind", required=True)
    for name, help_text in (("delay", "delay-spread table"), ("angular", "angular-spread and lobe table")):
        p_s = stats_sub.add_parser(name, help=help_text)
        add_manifest(p_s)
        add_thresholds(p_s)
        add_out(p_s)

    p_pas = sub.add_parser("pas", help="power angular spectrum tools")
    pas_sub = p_pas.add_subparsers(dest="pas_action", required=True)
    p_pas_dump = pas_sub.add_parser("dump", help="per-bin spectrum of one location")
    add_manifest(p_pas_dump)
    p_pas_dump.add_argument("--tx-id", required=True)
    p_pas_dump.add_argument("--rx-id", required=True)
    p_pas_dump.add_argument("--pol", choices=[p.value for p in Polarization], default="VV")
    p_pas_dump.add_argument("--side", choices=[s.value for s in Side], required=True)
    p_pas_dump.add_argument("--threshold-db", type=float, default=30.0)
    add_out(p_pas_dump)

    p_xpd = sub.add_parser("xpd", help="cross-polar discrimination analysis")
    xpd_sub = p_xpd.add_subparsers(dest="xpd_action", required=True)
    p_xpd_report = xpd_sub.add_parser("report", help="per-class XPD summary and CDF")
    add_manifest(p_xpd_report)
    p_xpd_report.add_argument("--format", choices=("json", "csv"), default="json")
    add_out(p_xpd_report)

    p_synth = sub.add_parser("synth", help="render a synthetic campaign")
    p_synth.add_argument("--params", type=Path, default=None, help="generator parameters JSON")
    p_synth.add_argument("--n", type=int, default=None, help="number of TX-RX placements")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", type=Path, required=True, help="campaign output directory")
    p_synth.add_argument(
        "--factory-layout",
        action="store_true",
        help="use the fixed 13-placement floor plan instead of --n drawn placements",
    )
    p_synth.add_argument("--tx-power-dbm", type=float, default=0.0)
    p_synth.add_argument("--campaign-id", default="synthetic-factory-142ghz")
    p_synth.add_argument("--truth-out", type=Path, default=None, help="write ground-truth drops JSON here")

    p_report = sub.add_parser("report", help="run the full pipeline and write the report bundle")
    add_manifest(p_report)
    add_thresholds(p_report)
    add_out(p_report, required=True)
    p_report.add_argument("--carrier-hz", type=float, default=None, help="override the manifest carrier")
    p_report.add_argument("--seed", type=int, default=0)
    p_report.add_argument(
        "--format",
        action="append",
        choices=("csv", "json"),
        help="report formats; repeatable (default both)",
    )
    p_report.add_argument(
        "--max-pl-db",
        type=float,
        default=152.0,
        help="measurable path-loss ceiling; non-positive disables it",
    )
    return parser


def _write_or_print(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _cmd_ingest(args) -> int:
    campaign = ingest_campaign(args.manifest, args.delay_resolution_ns)
    rows = []
    for loc in campaign:
        rows.append(
            {
                "tx_id": loc.tx_id,
                "rx_id": loc.rx_id,
                "polarization": loc.polarization.value,
                "distance_m": round(loc.distance_m, 4),
                "los": loc.los,
                "n_sweeps": len(loc.sweeps),
                "n_detectable": len(loc.detectable_sweeps()),
            }
        )
    if args.format == "json":
        doc = {
            "campaign_id": campaign.campaign_id,
            "carrier_hz": campaign.carrier_hz,
            "tx_power_dbm": campaign.tx_power_dbm,
            "locations": rows,
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        n_vv = sum(1 for r in rows if r["polarization"] == "VV")
        print(
            f"campaign {campaign.campaign_id}: {len(rows)} locations "
            f"({n_vv} VV, {len(rows) - n_vv} VH), carrier {campaign.carrier_hz / 1e9:g} GHz"
        )
        for r in rows:
            print(
                f"  {r['tx_id']}-{r['rx_id']} {r['polarization']} d={r['distance_m']:.2f} m "
                f"{'LOS' if r['los'] else 'NLOS'} sweeps={r['n_sweeps']} detectable={r['n_detectable']}"
            )
    return EXIT_OK


def _ceiling(value: float) -> float | None:
    return value if value > 0 else None


def _cmd_fit_pathloss(args) -> int:
    campaign = ingest_campaign(args.manifest)
    carrier = args.carrier_hz if args.carrier_hz is not None else campaign.carrier_hz
    kind = _KIND_FLAGS[args.kind]
    pol = Polarization(args.pol)
    ceiling = _ceiling(args.max_pl_db)
    samples = collect_samples(campaign.by_polarization(pol), kind, ceiling)
    fit = fit_ci(samples, carrier)
    doc = {
        "ple": fit.ple,
        "sigma_db": fit.sigma_db,
        "n_samples": fit.n_samples,
        "fspl_anchor_db": fit.fspl_anchor_db,
    }
    if pol is Polarization.VH:
        vv_samples = collect_samples(campaign.by_polarization(Polarization.VV), kind, ceiling)
        cix = fit_cix(samples, fit_ci(vv_samples, carrier), carrier)
        doc["xpd_db"] = cix.xpd_db
    print(json.dumps(doc, indent=2, sort_keys=True))
    if args.scatter_csv is not None:
        lines = ["distance_m,pl_db"]
        for s in sorted(samples, key=lambda s: (s.distance_m, s.pl_db)):
            lines.append(f"{s.distance_m:.4f},{s.pl_db:.4f}")
        _write_or_print("\n".join(lines) + "\n", args.scatter_csv)
    return EXIT_OK


def _cmd_stats(args) -> int:
    campaign = ingest_campaign(args.manifest)
    thresholds = tuple(args.threshold_db) if args.threshold_db else (20.0, 30.0)
    if any(t <= 0 for t in thresholds):
        raise ValidationError("threshold_db", f"thresholds must be > 0, got {thresholds}")
    vv_locs = campaign.by_polarization(Polarization.VV)
    if args.stats_kind == "delay":
        summaries = {t: campaign_delay_summary(vv_locs, t) for t in thresholds}
        text = _delay_csv(summaries)
    else:
        summaries = {t: campaign_angular_summary(vv_locs, t) for t in thresholds}
        text = _angular_csv(summaries)
    _write_or_print(text, args.out)
    return EXIT_OK


def _cmd_pas_dump(args) -> int:
    campaign = ingest_campaign(args.manifest)
    pol = Polarization(args.pol)
    match = [
        loc
        for loc in campaign
        if loc.tx_id == args.tx_id and loc.rx_id == args.rx_id and loc.polarization is pol
    ]
    if not match:
        raise ValidationError(
            "rx_id", f"no location {args.tx_id}-{args.rx_id} with polarization {pol.value}"
        )
    pas = power_angular_spectrum(match[0], Side(args.side), args.threshold_db)
    lines = ["bin_deg,power_db"]
    for bin_deg, power_mw in zip(pas.bins_deg, pas.powers_mw):
        if power_mw > 0:
            lines.append(f"{bin_deg:.4f},{10.0 * math.log10(power_mw):.4f}")
    _write_or_print("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_xpd_report(args) -> int:
    campaign = ingest_campaign(args.manifest)
    summary = xpd_summary(collect_xpds(campaign.paired_locations()))
    if args.format == "csv":
        _write_or_print(_xpd_csv(summary), args.out)
    else:
        doc = {
            path_class.value: {"mean_db": s.mean_db, "std_db": s.std_db, "n": s.n}
            for path_class, s in summary.items()
        }
        _write_or_print(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.params is not None:
        params = SynthesisParams.from_json_dict(json.loads(args.params.read_text(encoding="utf-8")))
    else:
        params = SynthesisParams()
    layout = factory_campaign_layout() if args.factory_layout else None
    rendered = render_campaign(
        params,
        args.n,
        args.seed,
        args.out,
        layout=layout,
        tx_power_dbm=args.tx_power_dbm,
        campaign_id=args.campaign_id,
    )
    if args.truth_out is not None:
        truth = [
            {
                "distance_m": drop.distance_m,
                "pl_db": drop.pl_db,
                "los": drop.los,
                "seed": drop.seed,
                "effective_omni_xpd_db": drop.effective_omni_xpd_db,
                "lobes": [
                    {
                        "center_deg": lobe.center_deg,
                        "taps": [
                            {
                                "delay_ns": tap.delay_ns,
                                "power_mw": tap.power_mw,
                                "xpd_db": tap.xpd_db,
                                "path_class": tap.path_class.value,
                            }
                            for tap in lobe.taps
                        ],
                    }
                    for lobe in drop.lobes
                ],
            }
            for drop in rendered.drops
        ]
        args.truth_out.parent.mkdir(parents=True, exist_ok=True)
        args.truth_out.write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(rendered.manifest_path)
    return EXIT_OK


def _cmd_report(args) -> int:
    config = RunConfig(
        manifest_path=args.manifest,
        out_dir=args.out,
        thresholds_db=tuple(args.threshold_db) if args.threshold_db else (20.0, 30.0),
        carrier_hz=args.carrier_hz,
        seed=args.seed,
        formats=tuple(args.format) if args.format else ("csv", "json"),
        max_measurable_pl_db=_ceiling(args.max_pl_db),
    )
    for path in run_pipeline(config):
        print(path)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    level_name = os.environ.get("SUBTHZ_CHAN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.WARNING))
    args = _build_parser().parse_args(argv)
    handlers = {
        "ingest": _cmd_ingest,
        "fit": _cmd_fit_pathloss,
        "stats": _cmd_stats,
        "pas": _cmd_pas_dump,
        "xpd": _cmd_xpd_report,
        "synth": _cmd_synth,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except DegenerateFitError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DEGENERATE_FIT
    except NoSignalError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as err:
        # covers ValidationError, CampaignFormatError, and bad JSON
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
