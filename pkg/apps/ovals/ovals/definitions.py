"""Definitions Module"""

STATUS_OK = 0  # universal status code for OK
STATUS_EXTINCT = 1  # run stopped at extinction detection
STATUS_TIME_REACHED = 2  # run stopped at a fixed time
STATUS_DENSITY_REACHED = 3  # run stopped once the density fell below a threshold

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_INVALID_CONFIG = 2
EXIT_NUMERICAL_FAILURE = 3

FRAME_UNRESCALED = "unrescaled"
FRAME_RENORMALIZED = "renormalized"

# radial flow
MIN_NODES = 16
TIP_NODE_FLOOR = 8  # nodes required within TIP_ARC of the tip after redistribution
TIP_ARC = 2.0
DEFAULT_CFL = 0.2
MAX_REJECTIONS = 40
SPACING_RATIO_TRIGGER = 2.0
CURVATURE_WEIGHT = 0.0  # weight of |kappa| * mean spacing in the redistribution density; 0 is uniform arc length
AXIS_TOLERANCE = 1e-12
Y_FLOOR = 1e-12  # off-axis nodes below this height count as degenerate
DEFAULT_MAX_STEPS = 2_000_000
DEFAULT_STOP_AREA_FRACTION = 1e-3
DEFAULT_SNAPSHOT_FRACTION = 0.02  # record a snapshot each time the size drops by this fraction
DEFAULT_FIT_POINTS = 8
LOG_EVERY_STEPS = 5000

# spectral
MIN_QUADRATURE = 8
MAX_QUADRATURE = 200
MIN_SAMPLED_NODES = 5
CUTOFF_THETA_FRACTION = 0.3

# solitons
MIN_SHRINKER_TIP = 2.0
CHART_SWITCH_SLOPE = 10.0
MIN_TAIL_RADIUS = 20.0
DEFAULT_TAIL_RADIUS = 200.0
BOWL_SPEED = 2.0**0.5 / 2.0

# aniso flow
MIN_GRID = 32
DELTA_CLAMP = 0.05
DEFAULT_ELL = 16.0
DEFAULT_TOL_RATIO = 0.01
DEFAULT_NORMALIZE_XTOL = 1e-3  # bisection tolerance in t, relative to the bracket

# verifier defaults
DEFAULT_M = 3.0
DEFAULT_K_WINDOW = (0.0, 1.0)
DEFAULT_S = 5.0
DEFAULT_L = 10.0
CONCAVITY_LIMIT = 1e-3
COLLAR_LIMIT = 0.2
CYLINDRICAL_LIMIT = 0.25

EXPERIMENT_TAGS = (
    "radial-asymptotics",
    "spectral-trace",
    "soliton-atlas",
    "foliation-check",
    "width-ratio",
    "ratio-solve",
)

# CSV schemas
SNAPSHOT_COLUMNS = ("i", "r", "y")
SURFACE_COLUMNS = ("theta", "phi", "r")
MODE_TRACE_COLUMNS = ("tau", "alpha0", "predicted", "residual_norm")
PROFILE_COLUMNS = ("y", "value", "derivative")
BOWL_COLUMNS = ("s", "value", "derivative")
SIGN_REPORT_COLUMNS = ("y1", "arc", "value", "sign")
SWEEP_COLUMNS = ("ell", "a1", "t_ext", "t_prime", "w1", "w2", "mu1")
RATIO_SOLVE_COLUMNS = ("target", "a1", "mu1")
REGION_COLUMNS = ("tau", "measured", "predicted", "deviation")
MONITOR_COLUMNS = ("tau", "quadratic_concavity", "cylindrical", "collar", "k_convexity")

MANIFEST_NAME = "manifest.json"
SUMMARY_NAME = "summary.txt"
TIMING_NAME = "timing.json"
DIAGNOSTIC_NAME = "diagnostic.json"

TOOL_VERSION = "0.1.0"
