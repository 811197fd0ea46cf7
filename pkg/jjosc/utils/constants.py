# Circuit defaults used in the bundled scenarios (SI units)
DEFAULT_I0 = 0.2
DEFAULT_KAPPA = 1.0
DEFAULT_C0 = 0.1

# Reject |x1| >= I0 * (1 - DOMAIN_MARGIN) so L(x1) stays finite
DOMAIN_MARGIN = 1e-12

# Sampling
DEFAULT_DT = 0.01
DEFAULT_SIM_SAMPLES = 2000
DEFAULT_TRAIN_SAMPLES = 1000

# Exact feedback linearization
DEFAULT_TAU = 1.0
X2_MIN = 1e-6

# Controllers
DEFAULT_HIDDEN = 8
U_MAX_FRACTION = 0.95
REFERENCE_GAINS = (-0.6176, 0.0410, 1.8195)

# Derivative-free search
DEFAULT_SEED = 7
DEFAULT_MAX_EVALS = 20000
DEFAULT_STEP_SCALE = 0.1
DEFAULT_BATCH_SIZE = 32
REJECTIONS_BEFORE_HALVING = 200
PENALTY_FACTOR = 10.0
LOG_EVERY_EVALS = 1000

# Export
SIGNIFICANT_DIGITS = 12
OUTPUT_DIR_ENV = "JJOSC_OUTPUT_DIR"

# Stepped reference used by the training scenarios: 5 segments of 2 s with levels
# drawn once from U[0, 0.15] (numpy RandomState(0), rounded to 4 decimals)
REFERENCE_STEP_TIMES = (0.0, 2.0, 4.0, 6.0, 8.0)
REFERENCE_LEVELS_SEED = 0
REFERENCE_LEVELS_HIGH = 0.15
REFERENCE_STEP_LEVELS = (0.0823, 0.1073, 0.0904, 0.0817, 0.0635)

# The same draw scaled to U[0, 0.02]; a single linear gain ratio holds y = v only in
# a narrow band of levels
GAIN_LEVELS_HIGH = 0.02
GAIN_STEP_LEVELS = (0.011, 0.0143, 0.0121, 0.0109, 0.0085)
