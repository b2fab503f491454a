"""
Centralized constants for the representation transfer toolkit.
"""
from dataclasses import dataclass

LOGGER_NAME = "reptransfer"


@dataclass(frozen=True)
class FileNames:
    """Output file name constants."""
    REGRET: str = "regret.csv"
    REPORT: str = "report.json"
    SUMMARY_CSV: str = "summary.csv"
    SUMMARY_TEXT: str = "summary.txt"
    MANIFEST: str = "manifest.json"
    SUITE: str = "suite.json"
    CONFUSION: str = "confusion.csv"
    VIZ_DIR: str = "viz"


@dataclass(frozen=True)
class Algorithms:
    """Algorithm selection constants."""
    SOURCE_ONLY: str = "source-only"
    ONLINE: str = "O-RepTransfer"
    GENERATIVE: str = "G-RepTransfer"
    ORACLE: str = "oracle"
    SCRATCH: str = "scratch"

    def all(self) -> tuple[str, ...]:
        """Return every selectable algorithm name."""
        return (self.SOURCE_ONLY, self.ONLINE, self.GENERATIVE, self.ORACLE, self.SCRATCH)


@dataclass(frozen=True)
class SuiteFamilies:
    """Environment family constants."""
    COMBLOCK: str = "comblock"
    SHARED_EMISSION: str = "shared-emission"
    PARTITIONED: str = "partitioned"
    MIXTURE: str = "mixture"

    def all(self) -> tuple[str, ...]:
        """Return every buildable suite family."""
        return (self.COMBLOCK, self.SHARED_EMISSION, self.PARTITIONED, self.MIXTURE)


@dataclass(frozen=True)
class EmissionModes:
    """Emission mode constants."""
    DECODABLE: str = "decodable"
    NOISY: str = "noisy"


@dataclass(frozen=True)
class SamplingModes:
    """Transition dataset sampling mode tags."""
    CROSS: str = "cross"
    ON_POLICY: str = "on-policy"


@dataclass(frozen=True)
class Defaults:
    """Numerical defaults shared across modules."""
    SMOOTHING: float = 1e-6
    TIE_TOLERANCE: float = 1e-9
    REINVERT_EVERY: int = 512
    SOLVE_INTERVAL: int = 50
    SOLVE_RUNS: int = 50
    SOLVE_CONSECUTIVE: int = 5
    VIZ_SAMPLES: int = 30
    COLLAPSE_TOLERANCE: float = 0.1
    ROLL_IN_UNIFORM_FRACTION: float = 0.1
    MAX_DECODER_CANDIDATES: int = 4096
    SPAN_POLICIES: int = 100
    NOISE_SCALE: float = 0.1
    CODEWORDS_PER_LATENT: int = 2
    DOCUMENT_VERSION: int = 1


@dataclass(frozen=True)
class ExitCodes:
    """Process exit codes."""
    OK: int = 0
    CONFIG_ERROR: int = 2
    SEED_FAILURE: int = 3


@dataclass(frozen=True)
class EnvVars:
    """Environment variable names."""
    OUTPUT_ROOT: str = "REPTRANSFER_OUTPUT_ROOT"
    JOBS: str = "REPTRANSFER_JOBS"


# Singleton instances for easy access
FILES = FileNames()
ALGORITHMS = Algorithms()
FAMILIES = SuiteFamilies()
EMISSION = EmissionModes()
SAMPLING = SamplingModes()
DEFAULTS = Defaults()
EXIT = ExitCodes()
ENV_VARS = EnvVars()
