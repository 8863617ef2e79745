"""Handlers for each sub-command; every handler returns a process exit code"""

import argparse
from pathlib import Path
from typing import List, Optional

from cli.manifest import RunManifest
from config.config_manager import ConfigManager
from core.densification import write_corpus_csv
from core.ingestion import BoundingBox, load_trajectories, parse_buildings
from core.statistics import (classify_totals, fit_all, fit_report, format_fit_table, histogram,
                             pareto_share, rank_fits)
from core.synthetic import SynthConfig, write_inputs
from core.trajectory import assign_bearings, interpolate_trip
from core.visibility import ViewParams, trip_geojson
from services.benchmark_service import BenchmarkService
from services.export_service import ExportService
from services.overpass_service import OverpassService
from services.pipeline_service import PipelineService, RunParams
from utils.constants import DEFAULTS, EXIT_OK, FIT_FAMILIES
from utils.errors import EmptyInput, InvalidParameter, UnknownTrip
from utils.helpers import stopwatch, write_json
from utils.logger import setup_logger, log_cli_command

logger = setup_logger(__name__)


def _pick(flag, config: ConfigManager, section: str, key: str, default, cast=float):
    """CLI flag beats the INI file, which beats the built-in default"""
    if flag is not None:
        return flag
    if cast is int:
        return config.get_int(section, key, default)
    return config.get_float(section, key, default)


def _view_params(args: argparse.Namespace, config: ConfigManager) -> ViewParams:
    return ViewParams(
        radius_m=_pick(args.radius, config, 'view', 'radius_m', DEFAULTS['radius_m']),
        lead_m=_pick(args.lead, config, 'view', 'lead_m', DEFAULTS['lead_m']),
        interval_s=_pick(args.interval, config, 'view', 'interval_s', DEFAULTS['interval_s']),
    )


def _precision(args, config: ConfigManager) -> int:
    return _pick(getattr(args, 'precision', None), config, 'aggregate', 'precision', DEFAULTS['precision'], int)


def _parse_cuts(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise InvalidParameter(f"cuts must be comma-separated fractions, got {text!r}")


def _parse_families(text: str) -> List[str]:
    families = [part.strip() for part in text.split(',') if part.strip()]
    unknown = [f for f in families if f not in FIT_FAMILIES]
    if unknown or not families:
        raise InvalidParameter(f"unknown families {unknown}; choose from {', '.join(FIT_FAMILIES)}")
    return families


def cmd_run(args: argparse.Namespace, config: ConfigManager) -> int:
    params = RunParams(
        view=_view_params(args, config),
        spacing_m=_pick(args.spacing, config, 'densify', 'spacing_m', DEFAULTS['spacing_m']),
        precision=_precision(args, config),
        leaf_size=_pick(args.leaf_size, config, 'index', 'leaf_size', DEFAULTS['leaf_size'], int),
        bbox=BoundingBox.parse(args.bbox) if args.bbox else None,
        workers=_pick(args.workers, config, 'run', 'workers', DEFAULTS['workers'], int),
        brute_force=args.brute_force,
    )
    log_cli_command(logger, 'run', {'trajectories': args.trajectories, 'buildings': args.buildings,
                                    **params.as_dict(), 'workers': params.workers})
    out_dir = Path(args.out_dir)
    manifest = RunManifest('run')
    manifest.add_inputs([args.trajectories, args.buildings])
    manifest.parameters = params.as_dict()

    result = PipelineService.run(args.trajectories, args.buildings, params)

    outputs = [ExportService.write_aggregate_csv(out_dir / 'aggregate.csv', result.aggregate)]
    if args.dump_corpus and result.corpus is not None:
        outputs.append(write_corpus_csv(out_dir / 'corpus.csv', result.corpus))
    manifest.add_outputs(outputs)
    manifest.timing_s = result.timings_s
    manifest.diagnostics = {**result.diagnostics(), 'workers': params.workers,
                            'index': result.index_stats, 'per_trip': result.per_trip}
    manifest.write(out_dir)

    if not result.aggregate:
        logger.warning("Aggregate is empty: no building point fell inside any viewing circle")
    print(f"{len(result.aggregate)} visible points, {result.aggregate.grand_total()} visibility events "
          f"-> {outputs[0]}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace, config: ConfigManager) -> int:
    families = _parse_families(args.families)
    log_cli_command(logger, 'fit', {'aggregate': args.aggregate, 'families': families})
    agg = ExportService.read_aggregate_csv(args.aggregate, _precision(args, config))
    if not agg:
        raise EmptyInput(f"{args.aggregate}: aggregate has no entries")
    totals = agg.totals()

    with stopwatch() as timer:
        results, failures = fit_all(totals, families, workers=args.workers)
    if not results:
        raise EmptyInput(f"no family could be fitted: {failures}")
    ranked = rank_fits(results)
    report = fit_report(ranked, len(totals), failures)
    out = write_json(args.out, report)

    manifest = RunManifest('fit')
    manifest.add_inputs([args.aggregate])
    manifest.parameters = {'families': families}
    manifest.add_outputs([out])
    manifest.timing_s = {'fit': timer['elapsed_s']}
    manifest.diagnostics = {'n': len(totals), 'ranking': report['ranking'], 'failures': failures}
    manifest.write(out.parent)

    print(format_fit_table(ranked))
    return EXIT_OK


def cmd_hotspots(args: argparse.Namespace, config: ConfigManager) -> int:
    cuts = _parse_cuts(args.cuts)
    log_cli_command(logger, 'hotspots', {'aggregate': args.aggregate, 'cuts': cuts})
    agg = ExportService.read_aggregate_csv(args.aggregate, _precision(args, config))
    classification = classify_totals(agg.totals(), cuts)
    out = ExportService.write_geojson(args.out, ExportService.quantile_geojson(agg, classification))

    manifest = RunManifest('hotspots')
    manifest.add_inputs([args.aggregate])
    manifest.parameters = {'cuts': cuts}
    manifest.add_outputs([out])
    manifest.diagnostics = {
        'thresholds': list(classification.thresholds),
        'group_sizes': classification.group_sizes,
        'shares': classification.shares,
    }
    manifest.write(Path(out).parent)

    print(ExportService.format_shares_table(classification))
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, config: ConfigManager) -> int:
    log_cli_command(logger, 'stats', {'aggregate': args.aggregate, 'bins': args.bins, 'top': args.top})
    agg = ExportService.read_aggregate_csv(args.aggregate, _precision(args, config))
    totals = agg.totals()
    edges, frequencies = histogram(totals, args.bins)
    share = pareto_share(totals, args.top)
    out = ExportService.write_histogram_csv(args.out, edges, frequencies)

    manifest = RunManifest('stats')
    manifest.add_inputs([args.aggregate])
    manifest.parameters = {'bins': args.bins, 'top': args.top}
    manifest.add_outputs([out])
    manifest.diagnostics = {'n': len(totals), 'min': min(totals), 'max': max(totals),
                            'pareto_share': share}
    manifest.write(Path(out).parent)

    print(f"{len(totals)} entries, totals {min(totals)}..{max(totals)}; "
          f"top {args.top:.0%} hold {share:.1%} of all visibility")
    return EXIT_OK


def cmd_trip_geojson(args: argparse.Namespace, config: ConfigManager) -> int:
    view = _view_params(args, config)
    log_cli_command(logger, 'trip-geojson', {'trajectories': args.trajectories, 'trip_id': args.trip_id})
    trips = dict(load_trajectories(args.trajectories))
    if args.trip_id not in trips:
        raise UnknownTrip(f"trip {args.trip_id!r} not found in {args.trajectories}")
    track = assign_bearings(interpolate_trip(trips[args.trip_id], view.interval_s))
    document = trip_geojson(track, view)
    out = ExportService.write_geojson(args.out, document)

    manifest = RunManifest('trip-geojson')
    manifest.add_inputs([args.trajectories])
    manifest.parameters = {'trip_id': args.trip_id, 'radius_m': view.radius_m, 'lead_m': view.lead_m,
                           'interval_s': view.interval_s}
    manifest.add_outputs([out])
    manifest.diagnostics = {'track_points': len(track.points), 'circles': len(document['features']) - 1}
    manifest.write(Path(out).parent)

    print(f"Trip {args.trip_id}: {len(track.points)} points, {len(document['features']) - 1} circles -> {out}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, config: ConfigManager) -> int:
    radius = _pick(args.radius, config, 'view', 'radius_m', DEFAULTS['radius_m'])
    leaf_size = _pick(args.leaf_size, config, 'index', 'leaf_size', DEFAULTS['leaf_size'], int)
    bbox = BoundingBox.parse(args.bbox)
    log_cli_command(logger, 'bench', {'points': args.points, 'queries': args.queries, 'radius': radius})
    report = BenchmarkService.run(args.points, args.queries, radius, bbox, leaf_size, args.seed)
    out = write_json(args.out, report)

    manifest = RunManifest('bench')
    manifest.parameters = {k: report[k] for k in ('n_points', 'n_queries', 'radius_m', 'leaf_size', 'seed', 'bbox')}
    manifest.add_outputs([out])
    manifest.timing_s = {'build': report['build_s']}
    manifest.diagnostics = {'speedup_mean': report['speedup_mean'], 'mismatches': report['mismatches']}
    manifest.write(Path(out).parent)

    print(f"tree mean {report['tree']['mean_s'] * 1e6:.1f} us, median {report['tree']['median_s'] * 1e6:.1f} us; "
          f"brute force mean {report['brute_force']['mean_s'] * 1e6:.1f} us, "
          f"median {report['brute_force']['median_s'] * 1e6:.1f} us; speedup {report['speedup_mean']:.1f}x")
    if args.index_stats:
        print(report['index_stats'])
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, config: ConfigManager) -> int:
    defaults = SynthConfig()
    synth = SynthConfig(
        seed=_pick(args.seed, config, 'synthetic', 'seed', defaults.seed, int),
        bbox=BoundingBox.parse(args.bbox) if args.bbox else defaults.bbox,
        n_trips=_pick(args.trips, config, 'synthetic', 'n_trips', defaults.n_trips, int),
        n_buildings=_pick(args.buildings, config, 'synthetic', 'n_buildings', defaults.n_buildings, int),
        trip_duration_s=_pick(args.duration, config, 'synthetic', 'trip_duration_s', defaults.trip_duration_s),
        speed_mps=(_pick(args.speed_min, config, 'synthetic', 'speed_min_mps', defaults.speed_mps[0]),
                   _pick(args.speed_max, config, 'synthetic', 'speed_max_mps', defaults.speed_mps[1])),
        block_m=_pick(args.block, config, 'synthetic', 'block_m', defaults.block_m),
        hub_sigma=_pick(args.hub_sigma, config, 'synthetic', 'hub_sigma', defaults.hub_sigma),
    )
    log_cli_command(logger, 'synth', {'seed': synth.seed, 'trips': synth.n_trips, 'buildings': synth.n_buildings})
    trajectories, buildings = write_inputs(synth, args.out_dir)

    manifest = RunManifest('synth')
    manifest.parameters = {
        'seed': synth.seed, 'bbox': list(synth.bbox.as_tuple()), 'n_trips': synth.n_trips,
        'n_buildings': synth.n_buildings, 'trip_duration_s': synth.trip_duration_s,
        'speed_mps': list(synth.speed_mps), 'block_m': synth.block_m, 'hub_sigma': synth.hub_sigma,
    }
    manifest.add_outputs([trajectories, buildings])
    manifest.write(args.out_dir)

    print(f"Wrote {trajectories} and {buildings}")
    return EXIT_OK


def cmd_fetch(args: argparse.Namespace, config: ConfigManager) -> int:
    bbox = BoundingBox.parse(args.bbox)
    endpoint = config.overpass_endpoint(args.endpoint)
    log_cli_command(logger, 'fetch', {'bbox': bbox.as_tuple(), 'endpoint': endpoint})
    with OverpassService(
        endpoint,
        cache_dir=args.cache_dir or config.get('overpass', 'cache_dir', '.overpass_cache'),
        timeout_s=config.get_float('overpass', 'timeout_s', 25.0),
        max_attempts=config.get_int('overpass', 'max_attempts', 3),
        backoff_s=config.get_float('overpass', 'backoff_s', 1.0),
    ) as service:
        document = service.fetch_buildings(bbox)
    layer = parse_buildings(document, source=endpoint)
    out = ExportService.write_geojson(args.out, document)

    manifest = RunManifest('fetch')
    manifest.parameters = {'bbox': list(bbox.as_tuple()), 'endpoint': endpoint}
    manifest.add_outputs([out, service.cache_path(bbox)])
    manifest.diagnostics = {'features': len(document['features']), 'usable_footprints': len(layer.footprints),
                            'skipped_geometries': layer.skipped}
    manifest.write(Path(out).parent)

    print(f"{len(document['features'])} buildings -> {out}")
    return EXIT_OK


HANDLERS = {
    'run': cmd_run,
    'fit': cmd_fit,
    'hotspots': cmd_hotspots,
    'stats': cmd_stats,
    'trip-geojson': cmd_trip_geojson,
    'bench': cmd_bench,
    'synth': cmd_synth,
    'fetch': cmd_fetch,
}
