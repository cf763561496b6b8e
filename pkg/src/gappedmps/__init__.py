"""Finite-dimensional numerics for MPS parent Hamiltonians.

Transfer-map spectral analysis, adjoint-invariant chain decompositions,
canonicalization into a structured two-sided tensor form, and desk-scale
spin-chain experiments (gaps, edge-state decay, interpolation paths).
"""

from .canonical import (CanonicalHalf, ClassAData, KeySolution, Septuplet,
                        assemble_classa, assemble_tensor, binomial_convolution,
                        canonical_half, canonicalize, check_structure,
                        dual_basis, extract_structure, key_solve, measure_l0,
                        reduction_step, sieve_coefficients, to_condition5,
                        validate_classa, weyl_reorder)
from .chain import (InvariantChain, align_to_primitive, build_chain,
                    corner_rescale, minimal_invariant_subspace,
                    verify_chain_words)
from .cpmaps import (AntiunitaryMatch, TransferSpectrum, find_antiunitary_match,
                     find_intertwiner, is_primitive, peripheral_structure,
                     perron_data)
from .errors import GappedMpsError
from .linalg import EigenData, general_eig, hermitian_eig, orthonormal_span
from .models import (aklt_tuple, four_corner_toy, ghz_tuple, pauli_tuple,
                     random_classa, random_primitive_tuple, scalar_tuple,
                     scramble, toy_classa, xz_tuple)
from .mps import (KernelSpaceBasis, MpsTuple, apply_transfer, gamma_map,
                  ground_space_basis, kernel_space, support_projection,
                  transfer_matrix, word_products)
from .serialize import (load_classa, load_tuple, save_classa, save_tuple,
                        write_csv)
from .spinchain import (AssumptionDiagnostics, ChainSpectrum, EdgeExpectation,
                        FcsTriple, Interaction, assemble_hamiltonian,
                        edge_expectation, fcs_evaluate, ground_data,
                        interpolation_scan, ltqo_scan, parent_interaction,
                        projector_distance)

__version__ = "0.1.0"
