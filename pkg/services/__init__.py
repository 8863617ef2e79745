"""Services module for the vehicle visibility pipeline"""

from .overpass_service import OverpassService
from .export_service import ExportService
from .pipeline_service import PipelineService, RunParams, RunResult
from .benchmark_service import BenchmarkService

__all__ = ['OverpassService', 'ExportService', 'PipelineService', 'RunParams', 'RunResult', 'BenchmarkService']
