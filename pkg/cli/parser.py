"""Command-line definitions"""

import argparse

from utils.constants import APP_NAME, APP_VERSION, FIT_FAMILIES


def _view_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--radius', type=float, help='viewing circle radius in meters (default 50)')
    parser.add_argument('--lead', type=float, help='circle center distance ahead of the vehicle (default 50)')
    parser.add_argument('--interval', type=float, help='resampling interval in seconds (default 5)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description='Building-outline visibility from connected-vehicle trajectories')
    parser.add_argument('--version', action='version', version=f'{APP_NAME} {APP_VERSION}')
    parser.add_argument('--config', default='config.ini', help='INI configuration file (created if missing)')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='count visibility end to end and write the aggregate CSV')
    run.add_argument('--trajectories', required=True, help='CSV with header trip_id,t,lat,lon')
    run.add_argument('--buildings', required=True, help='GeoJSON FeatureCollection of footprints')
    run.add_argument('--bbox', help="min_lon,min_lat,max_lon,max_lat or 'waterloo'")
    run.add_argument('--out-dir', default='out')
    _view_flags(run)
    run.add_argument('--spacing', type=float, help='densification spacing in meters (default 10)')
    run.add_argument('--precision', type=int, help='decimal places of aggregate keys (default 6)')
    run.add_argument('--leaf-size', type=int, help='ball tree leaf size (default 32)')
    run.add_argument('--workers', type=int, help='worker processes for per-trip counting (default 1)')
    run.add_argument('--brute-force', action='store_true', help='use the linear scan instead of the ball tree')
    run.add_argument('--dump-corpus', action='store_true', help='also write the densified corpus CSV')

    fit = sub.add_parser('fit', help='fit distributions to aggregate totals')
    fit.add_argument('--aggregate', required=True)
    fit.add_argument('--out', default='out/fit_report.json')
    fit.add_argument('--families', default=','.join(FIT_FAMILIES))
    fit.add_argument('--precision', type=int)
    fit.add_argument('--workers', type=int, default=1)

    hotspots = sub.add_parser('hotspots', help='classify aggregate entries into quantile groups')
    hotspots.add_argument('--aggregate', required=True)
    hotspots.add_argument('--cuts', default='0.90,0.95,0.99')
    hotspots.add_argument('--precision', type=int)
    hotspots.add_argument('--out', default='out/hotspots.geojson')

    stats = sub.add_parser('stats', help='histogram and Pareto share of aggregate totals')
    stats.add_argument('--aggregate', required=True)
    stats.add_argument('--bins', type=int, default=50)
    stats.add_argument('--top', type=float, default=0.10, help='fraction of entries for the Pareto share')
    stats.add_argument('--precision', type=int)
    stats.add_argument('--out', default='out/histogram.csv')

    trip = sub.add_parser('trip-geojson', help='export one trip with its viewing circles')
    trip.add_argument('--trajectories', required=True)
    trip.add_argument('--trip-id', required=True)
    trip.add_argument('--out', default='out/trip.geojson')
    _view_flags(trip)

    bench = sub.add_parser('bench', help='ball tree vs brute-force query latency')
    bench.add_argument('--points', type=int, default=100_000)
    bench.add_argument('--queries', type=int, default=10_000)
    bench.add_argument('--radius', type=float)
    bench.add_argument('--leaf-size', type=int)
    bench.add_argument('--bbox', default='waterloo')
    bench.add_argument('--seed', type=int, default=0)
    bench.add_argument('--out', default='out/bench.json')
    bench.add_argument('--index-stats', action='store_true', help='print the index summary')

    synth = sub.add_parser('synth', help='generate synthetic trajectories and buildings')
    synth.add_argument('--out-dir', default='synthetic')
    synth.add_argument('--seed', type=int)
    synth.add_argument('--trips', type=int)
    synth.add_argument('--buildings', type=int)
    synth.add_argument('--duration', type=float, help='trip duration in seconds')
    synth.add_argument('--speed-min', type=float)
    synth.add_argument('--speed-max', type=float)
    synth.add_argument('--block', type=float, help='street grid spacing in meters')
    synth.add_argument('--hub-sigma', type=float, help='log-normal spread of intersection traffic weights')
    synth.add_argument('--bbox', help="min_lon,min_lat,max_lon,max_lat or 'waterloo'")

    fetch = sub.add_parser('fetch', help='download OSM building footprints through Overpass')
    fetch.add_argument('--bbox', required=True, help="min_lon,min_lat,max_lon,max_lat or 'waterloo'")
    fetch.add_argument('--endpoint', help='Overpass interpreter URL (or $OVERPASS_ENDPOINT)')
    fetch.add_argument('--cache-dir')
    fetch.add_argument('--out', default='out/buildings.geojson')

    return parser
