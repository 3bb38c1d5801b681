"""Hyponormality of block Toeplitz operators with matrix monomial symbols
on the vector-valued weighted Bergman space.

The package pairs closed-form criteria (:mod:`.criteria`) with an exact
finite-truncation spectral oracle (:mod:`.bergman_op`) and a randomized
harness that cross-checks the two (:mod:`.verify`).
"""

from .bergman_op import (
    CoeffSequence,
    CommutatorForm,
    OracleVerdict,
    build_truncated,
    commutator_form,
    numeric_hypo_test,
    project_monomial_coeff,
    series_form,
)
from .criteria import (
    CriterionVerdict,
    check_normal,
    check_opposite_pair,
    check_single_term,
    check_two_term_necessary,
    check_two_term_sufficient,
)
from .errors import DomainError, HypothesisError, SamplingBudgetError, ShapeError
from .moments import WAlphaConfig, lambda_p, lambda_pq, lemma22_holds, w_alpha
from .symbols import (
    BlockSymbol,
    Circulant,
    Convention,
    MonomialTerm,
    adjoint_symbol,
    circulant_sums,
    make_circulant,
    parse_symbol,
)
from .verify import CrossReport, InstanceSpec, cross_validate, gen_instance, thm33_witness

__version__ = "0.1.0"
