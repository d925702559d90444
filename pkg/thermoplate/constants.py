"""Constants for the thermoelastic plate simulator."""

from enum import Enum, IntEnum
from typing import Final

DEFAULT_SIDE_LENGTH: Final = 3.141592653589793
SUPPORTED_DIMENSIONS: Final = (1, 2)

# Reconstruction tolerance promised by the sine transforms.
TRANSFORM_TOLERANCE: Final = 1e-12

# Slack used when comparing sampled quantities against declared bounds.
BOUND_SLACK: Final = 1e-12
HOELDER_SLACK: Final = 1e-9

DEFAULT_DISSIPATIVITY_SCALE: Final = 1e3
DEFAULT_DISSIPATIVITY_SAMPLES: Final = 2001

UNDERFLOW_FLOOR: Final = 1e-14

# Largest plate stiffness for which the Lyapunov construction applies.
ETA_MAX_FOR_LYAPUNOV: Final = 2.0
# Splitting parameter of the psi bound.
DELTA0: Final = 0.5

DEFAULT_PULLBACK_T0: Final = 5.0
DEFAULT_PULLBACK_LEVELS: Final = 6
DEFAULT_PULLBACK_TOL: Final = 1e-6
ABSORBING_MARGIN: Final = 0.1

CSV_SIGNIFICANT_DIGITS: Final = 17
REPORT_SCHEMA_VERSION: Final = "1.0.0"

SNAPSHOT_MAGIC: Final = b"TPLT"
SNAPSHOT_VERSION: Final = 1

TRAJECTORY_COLUMNS: Final = (
    "time",
    "y_norm",
    "E",
    "kinetic",
    "plate",
    "thermal",
    "potential",
    "phi",
    "psi",
    "L_functional",
)


class NormSpace(Enum):
    """Norms of the phase-space scale."""

    L2 = "L2"
    H2 = "H2"
    H1_SEMINORM = "H1seminorm"
    H_NEG2 = "Hneg2"


class OperatorKind(Enum):
    """Per-mode 3x3 matrices that can be built."""

    OPERATOR_A = "operator_A"
    OPERATOR_A_INVERSE = "operator_A_inverse"
    GENERATOR_G = "generator_G"


class CoefficientVariant(Enum):
    """Shapes of the coupling coefficient a(t)."""

    CONSTANT = "constant"
    SINUSOIDAL = "sinusoidal"


class NonlinearityVariant(Enum):
    """Shipped nonlinearities f(t, s)."""

    ZERO = "zero"
    IDENTITY = "identity"  # test-only, f(t, s) = s
    MODULATED_SINE = "modulated_sine"
    MODULATED_SATURATING = "modulated_saturating"
    SOFT_CUBIC = "soft_cubic"


class ExitCode(IntEnum):
    """Exit-code contract of the command-line tool."""

    SUCCESS = 0
    CONFIG_ERROR = 1
    BLOW_UP = 2
    VERIFICATION_FAILED = 3


class OutputFormat(Enum):
    """Report formats of the command-line tool."""

    CSV = "csv"
    JSON = "json"
