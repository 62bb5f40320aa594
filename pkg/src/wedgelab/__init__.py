"""Numerical laboratory for twisted-local fermionic fields on the mass shell.

The package builds the antisymmetric Fock space over one-particle vectors
obtained by restricting test functions to the relativistic mass shell,
realizes the fields and their twisted partners as finite matrices through
a Jordan-Wigner construction, and probes wedge duality, string-localized
generators, central-sequence witnesses, and the geometric modular
structure of wedge algebras.
"""
from .errors import (WedgelabError, GridSpanError, SupportPreconditionError,
                     DomainViolationError, ConfigValidationError)
from .mass_shell import (ModelConfig, MassShellGrid, OneParticleVector,
                         build_grid, restrict, inner_product,
                         commutator_value, anticommutator_value,
                         pauli_jordan_profile, GridConfigError,
                         GridMismatchError, EvaluationError)
from .testfn import (TestFunction, RightWedge, LeftWedge, Ball, Slab, All,
                     region_in_right_wedge, region_in_left_wedge,
                     regions_spacelike, wedge_bump, seed_bump, slab_bump,
                     translate, lemma32_pair, coherence_scalar,
                     klein_gordon_image, string_function, position_profile,
                     check_support, from_descriptor)
from .fock_car import (ModeBasis, FockOperator, FockVector, vacuum,
                       build_modes, creation, annihilation, field_plus,
                       field_minus, field, twisted_field, number_N,
                       parity_Z, klein_V, parity_projectors,
                       vacuum_expectation_wick, CapacityError,
                       EmptyBasisError, OutOfSpanError, MAX_MODES)
from .algebra_probes import (clifford_projection, meet, meet_with_rank,
                             ST_identity_check, central_sequence_experiment,
                             WitnessReport, WitnessRecord, LocalityReport,
                             word_basis, weak_locality_check,
                             relative_locality_check, string_locality_check,
                             local_net_element, interval_generators,
                             isotony_and_locality_scan,
                             NonOrthonormalPairError, NonProjectionError)
from .modular import (RapidityProfile, rapidity_profile, profile_norm,
                      boost_flow, theta_reflection, mollifier_profile,
                      half_continuation, delta_consistency_check,
                      flow_sign_calibration, TomitaResult, tomita_S_check,
                      tomita_refinement)

__version__ = "0.1.0"
