"""Phase-space consistency of separable augmented densities.

A spherical population with augmented density N(Psi, r^2) = P(Psi) R(r^2)
admits a unique two-integral distribution function; this library decides,
where the theory permits, whether that distribution is non-negative.  The
ingredients -- Riemann-Liouville fractional operators, a generalized
Mittag-Leffler evaluator, complete-monotonicity scans, the Post-Widder
inversion and the generalized Eddington inversion -- are exposed directly
and cross-checked against independent quadrature in the test suite.
"""

from .config import DEFAULTS, GridSpec
from .errors import (BoundarySingularity, DifferentiationDepthExceeded,
                     DomainError, NonConvergence, QuadratureFailure, SepadError)
from .specfun import MLSpec, gamma_recip, ml_derivative, ml_eval, ml_neg_order_split, pochhammer
from .exprfn import Expr, X, parse_expr
from .fracops import frac_derivative, power_rule, rl_integral, rl_signed
from .cmcheck import CMVerdict, cm_sequence_test, cm_test, phi_from_R, post_widder
from .admodels import (CoeffTable, PhiValue, RadialModel, beta_profile, binomial_transform,
                       coeff_table, constant_beta, custom_radial, general_family,
                       phi_closed_form, radial_R, R_n)
from .consistency import (ConsistencyReport, SeparableAD, VerdictOptions,
                          necessary_potential, necessary_radial,
                          sufficiency_threshold, sufficient_potential,
                          sufficient_radial, verdict)
from .dfinversion import (PowerLawDF, RadialOrbitDF, ad_from_powerlaw,
                          eddington_invert, moment_F_mu, oracle_ad_from_df,
                          oracle_ad_quadrature, radial_orbit_invert, velocity_moment)

__version__ = "0.1.0"
