"""Numerical laboratory for the central limit theorem via Haar expansions of quantile functions.

Quantile functions are expanded in the Haar basis and truncated, sums of the
truncated variables are projections of an equiprobable multinomial, and the
multinomial is compared point by point with a matched Gaussian lattice.
"""
__version__ = "0.1.0"

from .convergence import (DeltaReport, DnReport, clt_gap, compute_dn, lemma1_variance_bound,  # noqa: E402
                          monte_carlo_gap, theorem1_bound)
from .distributions import (DistributionSpec, bit_position, project_uniform, quantile_eval,  # noqa: E402
                            sample_iid_sums)
from .gaussian import (gaussian_expectation_reference, gaussian_riemann_sum, hyperplane_box_mass,  # noqa: E402
                       select_b1)
from .haar import HaarExpansion, haar_coeff, haar_eval, truncate_expansion, truncation_defect  # noqa: E402
from .multinomial import (JVector, LatticeWindow, enumerate_lattice, multinomial_expectation_truncated,  # noqa: E402
                          multinomial_log_pmf, stirling_log_approx, tail_cutoff_b0)
