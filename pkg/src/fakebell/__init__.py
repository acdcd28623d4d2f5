"""Monte-Carlo CHSH Bell tests with genuine pairs and faked-state detector control."""
from .chsh import ChshResult, Classification, Correlator, chsh, chsh_from_tally, classify, correlation
from .coincidence import CoincidenceTally, DetectionEvent, EventStream, efficiency, match, tally
from .config import RunConfig, config_from_dict, default_config, load_config
from .detectors import AnalyzerConfig, DetectorParams, power_monitor, respond_faked, respond_genuine
from .errors import ConfigError, StreamFormatError, UndefinedCorrelatorError
from .eve import InterceptRecord, intercept_resend
from .optics import PulsePolarization, analyzer_fractions, faked_power_map
from .runner import RunReport, analyze, run, sweep
from .sources import FakedState, FsgProgram, SourceConfig, born_sample, emission_times, expected_S, fsg_program, sample_faked_pair

__version__ = "0.1.0"

__all__ = [
    "AnalyzerConfig", "ChshResult", "Classification", "CoincidenceTally", "ConfigError",
    "Correlator", "DetectionEvent", "DetectorParams", "EventStream", "FakedState", "FsgProgram",
    "InterceptRecord", "PulsePolarization", "RunConfig", "RunReport", "SourceConfig",
    "StreamFormatError", "UndefinedCorrelatorError", "analyze", "analyzer_fractions",
    "born_sample", "chsh", "chsh_from_tally", "classify", "config_from_dict", "correlation",
    "default_config", "efficiency", "emission_times", "expected_S", "faked_power_map",
    "fsg_program", "intercept_resend", "load_config", "match", "power_monitor",
    "respond_faked", "respond_genuine", "run", "sample_faked_pair", "sweep", "tally",
]
