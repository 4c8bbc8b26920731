"""Simulate quantum one-way protocols and compile them into deterministic ones.

Modules: ``linalg`` (Jacobi eigensolver, tensor tools), ``measures``
(entropies and distances in bits), ``protocol`` (partial functions and
quantum one-way protocols), ``learner`` (guess-refinement compiler),
``oracle`` (exact deterministic cost), ``proofs`` (MajIx and LSD proof
protocols), ``instances`` (text format) and ``cli``.
"""

from .learner import LearnerConfig, compile_deterministic_protocol, run_learning, update_guess
from .linalg import hermitian_eig, jacobi_eigh, partial_trace, spectral_apply, tensor_product
from .measures import relative_entropy, relative_min_entropy, trace_distance, von_neumann_entropy
from .oracle import exact_one_way_cost, validate_compiled
from .protocol import PartialFunction, QuantumOneWayProtocol, boost, random_protocol, teleport_prior, verify_protocol

__version__ = "0.1.0"
