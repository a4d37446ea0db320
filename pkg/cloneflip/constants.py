
# ------------ Numerical Tolerances -----------
ALGEBRAIC_TOLERANCE = 1e-12
EIGENVALUE_TOLERANCE = 1e-10
BLOCH_TOLERANCE = 1e-9
MAX_QUBITS = 3

# ------------ Qubit Order (S x A x B) -----------
QUBIT_S = 0
QUBIT_A = 1
QUBIT_B = 2

# ------------ Input State Labels -------------------
STATE_H = "H"
STATE_V = "V"
STATE_PLUS = "plus"
STATE_MINUS = "minus"
STATE_R = "R"
STATE_L = "L"
STATE_BLOCH_PREFIX = "bloch:"
STATE_ALL = "all"

# the three states injected in the experiment
MEASURED_STATES = (STATE_H, STATE_PLUS, STATE_R)

# ------------ Ideal Machine Values -------------------
CLONE_FIDELITY = 5.0 / 6.0
ANTICLONE_FIDELITY = 1.0 / 3.0
FLIP_FIDELITY = 2.0 / 3.0
BELL_BRANCH_PROBABILITY = 1.0 / 3.0
CLASSICAL_BOUND = 2.0 / 3.0

# ------------ Measured Fidelities -------------------
TARGET_FIDELITY_H = 0.98
TARGET_FIDELITY_PLUS = 0.78
TARGET_FIDELITY_R = 0.76
TARGET_FIDELITY_AVERAGE = 0.84
MEASURED_FIDELITY_TARGETS = {
    STATE_H: TARGET_FIDELITY_H,
    STATE_PLUS: TARGET_FIDELITY_PLUS,
    STATE_R: TARGET_FIDELITY_R,
}

# ------------ Emulator Defaults -------------------
SPEED_OF_LIGHT_UM_PER_FS = 0.299792458
PUMP_PULSE_DURATION_FS = 140.0
DEFAULT_COHERENCE_LEN_UM = SPEED_OF_LIGHT_UM_PER_FS * PUMP_PULSE_DURATION_FS / 2.0
DEFAULT_Z_UM = 0.0
DEFAULT_MEAN_FOURFOLD_RATE = 1000.0
DEFAULT_ACQUISITION_S = 2400.0
DEFAULT_BACKGROUND_RATE = 0.0

# ------------ Tomography Defaults -------------------
DEFAULT_COUNTS_PER_BASIS = 10000
DEFAULT_BOOTSTRAP_N = 200
MIN_BOOTSTRAP_N = 100
MIN_COUNTS_PER_BASIS = 100
TOMOGRAPHY_ACQUISITION_S = 24 * 3600.0

# ------------ Monte Carlo -------------------
MIN_BOUND_TRIALS = 10000
DEFAULT_BOUND_TRIALS = 1000000
DEFAULT_SEED = 0
DEFAULT_WORKERS = 1

# ------------ Seed Labels -------------------
SEED_LABEL_RESTORE = "restore"
SEED_LABEL_SWEEP = "sweep"
SEED_LABEL_TOMOGRAPHY = "tomography"
SEED_LABEL_BOOTSTRAP = "bootstrap"
SEED_LABEL_BOUND = "bound"

# ------------ File Formats -------------------
COUNTS_CSV_COLUMNS = ("basis", "n_plus", "n_minus", "duration_s")
SWEEP_CSV_COLUMNS = ("z_um", "counts_d2", "counts_d2star")
MANIFEST_FILE_NAME = "manifest.json"
CONFIG_SECTION = "experiment"

# ------------ Exit Codes -------------------
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVARIANT = 3

TOOL_VERSION = "cloneflip 0.1.0"
