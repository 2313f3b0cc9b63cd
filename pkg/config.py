# Centralized configuration for shared constants
import logging

TOOL_NAME = 'wegner-lab'
TOOL_VERSION = '1.0.0'

# Logging
LOGGER_NAME = 'wegner_lab'
LOG_FILE = 'debug.log'
LOG_LEVEL = logging.WARNING
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

# Dense linear algebra limits
DENSE_LIMIT = 8192          # largest operator handed to the dense eigensolver
GAUSS_DENSE_NODES = 4096    # above this the Gaussian sampler uses spectral embedding
EMBEDDING_PADDING_TAUS = 6  # torus padding in units of the correlation length

# Tolerances
RECONSTRUCTION_TOL = 1e-12
QUADRATURE_WEIGHT_TOL = 1e-10
PSD_TOL = 1e-10             # relative eigenvalue floor for covariance factorizations
RESIDUAL_FACTOR = 1e-8      # ||Hv - lv|| <= RESIDUAL_FACTOR * ||H||_max * N
DIAMAGNETIC_TOL = 1e-10
RESOLVENT_TOL = 1e-9
BRACKETING_TOL = 1e-10
DECOUPLING_TOL = 1e-10
QUADRATURE_TOL = 1e-8
SERIES_TAIL_TOL = 1e-12
SIGMA_BAND = 3.0

# Bound minimization
SEARCH_POINTS = 40
REFINE_PASSES = 2
BETA_RANGE = (1e-3, 1e3)      # divided by sqrt(C0) for the Gaussian family
ELL_FLOOR = 1e-3              # smallest subcube edge in units of tau
ELL_CEILING_TAUS = 10.0       # largest edge when no containment constant is given
S_MAX_TAUS = 3.0
MIN_REL_TOL = 1e-6

# Constant-field Gaussian preset: B = 1, C(0) = (B/5)^2, tau = 100 B^(-1/2)
FIG1 = {
    'dimension': 2,
    'B': 1.0,
    'c0': (1.0 / 5.0) ** 2,
    'tau': 100.0,
    'energies': (-0.5, 2.5, 61),
}

# Energy grid (start, stop, count) of an IDS run without an ids.energies entry
IDS_ENERGIES = (0.0, 4.0, 81)

# Energies of the asymptotics mode, in units of sqrt(C0)
ASYMPTOTIC_ENERGIES = (-400.0, -200.0, -100.0, -50.0, 50.0, 100.0, 200.0, 400.0)

# Asymptotic energies below this |E| / sqrt(C0) are flagged as too small
ASYMPTOTIC_ENERGY_FLOOR = 10.0

# Command-line contract
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_CHECK_FAILED = 4
JOBS_ENV = 'WEGNER_LAB_JOBS'
SCHEMA_VERSION = 1
CSV_FLOAT_FORMAT = '%.15g'

boundary_conditions = ['D', 'N']

check_names = ['diamagnetic-semigroup',
               'diamagnetic-partition',
               'resolvent-power',
               'ground-state',
               'bracketing',
               'decoupling',
               'spectral-averaging',
               'golden-thompson',
               'neumann-partition',
               'wegner-mc']
