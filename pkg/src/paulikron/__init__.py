"""Cut-aware low-rank Kronecker decomposition of Pauli-sum Hamiltonians."""

from ._version import __version__
from .bench import BenefitRecord, TimingProtocol, bench_system, benefit_ratios, storage_bytes_dense, storage_bytes_factors, time_with_protocol
from .certificate import (
    AUDIT_STATE_SEED,
    EPSILON_CHEM,
    EPSILON_CHEM_ROUNDED,
    CertificateRecord,
    ChemTarget,
    audit_ground_state,
    audit_profile,
    certificate_curve,
    energy_bound,
    first_certified_rank,
    random_states,
    required_rho,
    rms_state_error,
    tightness_ratio,
)
from .chem import AdamConfig, ChemBoundaryTrace, ChemConfig, FactorParams, mixed_gradient, mixed_loss, optimize_rank_stage, run_chem_boundary
from .cut import Bipartition, SparseCoeffMatrix, make_cut, reshape
from .dense import DenseGuards, dense_coeff_matrix, dense_operator, dense_svd_spectrum, ground_energy
from .estimators import ChemBoundaryCertifier, KroneckerCompressor
from .exceptions import *  # noqa: F401,F403
from .formats import SystemRecord, read_hamiltonian, write_hamiltonian
from .generators import generate_planted, generate_random, generate_tfim
from .lowrank import RANK_SCAN, SCREENING, VALIDATION, KroneckerFactorization, PowerIterOptions, RankProfile, factors_to_pauli, rank_scan, top_singular_triplet
from .pauli import PauliString, PauliSum, filter_coefficients, split_identity, traceless_frobenius_norm
from .pipeline import PipelineConfig, run_pipeline
