"""Functors on finite-dimensional F_2-vector spaces, restricted to dimensions <= kmax."""

from .core import (DEFAULT_KMAX, Degree, HeadroomError, NatTrans, NotFunctorial, NotNatural, PolyFunctor,
                   all_morphisms, apply_to_nat, cokernel, compose_functors, constant, delta_functor,
                   direct_sum, from_generators, from_rule, generators, identity_nat, image, is_short_exact,
                   iterated_delta, kernel, poly_degree, quotient, same_functor, subfunctor, zero_functor,
                   zero_nat)
from .standard import G, Id, L, S, T, const, quadratic_map, standard
from .homalg import (ExtClass, FunctorSES, SplitReport, YonedaTwoExt, check_split_certificate, check_witness,
                     ext2_nonzero, ext_dims, hom_space, resolve, ses_splits, yoneda_class)
from .classes import e1_row, e1_tilde_row, phi_ses, pullback_ses, split_ses, split_two_extension
from .detect import DegreeHypothesis, DetectionChain, detection_functor, shifted
from .localize import Localization, LocalizationError, localize, localize_map
from .obstruction import (CONSISTENT, FIRES, NOT_MET, NOT_REALIZABLE, UNDECIDED, MalformedInclusion,
                          ObstructionReport, PipelineReport, RealizabilityReport, module_obstruction,
                          obstruction, realizability)

__all__ = [name for name in dir() if not name.startswith("_")]
