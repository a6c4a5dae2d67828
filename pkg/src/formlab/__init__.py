"""Exterior differential forms and integrability checks on coordinate charts.

The package is layered: an exact-rational scalar kernel (``formlab.scalar``),
charts with metrics and connections, the form algebra, relation
classification and degree descent, characteristics of first-order PDEs, a
set of worked physical cases and a small scripting front end.
"""
from .chart import (Chart, Connection, Metric, MetricClosureReport, array_verdict, christoffel,
                    metric_closure_report, riemann, torsion)
from .characteristics import (CharacteristicSystem, FirstOrderPDE, Trajectory,
                              canonical_relations, characteristic_system, functional_status,
                              integrate_characteristics, verify_along)
from .corpus import (CaseReport, classify_instability, em_case, gasdynamics_case, run_case,
                     thermo_case)
from .dsl import parse_script, run_script
from .errors import *  # noqa: F401,F403
from .forms import (ClosureResult, Commutator1, DifferentialForm, commutator_1form,
                    exterior_derivative, hodge_star, is_closed, potential, pullback,
                    restrict_to_pseudostructure, wedge)
from .integrability import (Relation, classify_relation, degree_descent, descent_chain,
                            find_integrating_factor, frobenius_test)
from .scalar import (ZeroVerdict, differentiate, evaluate_numeric, is_zero, normalize,
                     parse_expr, substitute, to_text)

__version__ = "0.1.0"
