"""Qubit ensembles, preparation knowledge and judge-mediated dispute protocols."""

from .ensemble import (AlreadyMeasuredError, BasisOnly, ConsumedEnsembleError, Ensemble, Full,
                       KnowledgeView, NoKnowledge, Notebook, PreparationSpec, Provenance,
                       ViewKind, ensemble_density, measure_all, measure_particle,
                       notebook_matches, prepare, substitute, verify_against_notebook)
from .protocols import (ProtocolAParams, ProtocolBParams, Transcript, Verdict, Winner,
                        charles_win_probability_b, charles_win_probability_b_random,
                        run_protocol_a, run_protocol_b, soundness_protocol_a)
from .quantum import (X, X_AXIS, Y, Y_AXIS, Z, Z_AXIS, Axis, DensityMatrix, Direction,
                      GeneralizedMeasurement, QubitPureState, born_probability,
                      density_of_mixture, generalized_distribution, outcome_distribution,
                      sample_outcome, trace_distance)
from .stats import (TrialEstimate, binomial_tail, confidence_interval, run_trials,
                    uniform_axis, uniform_direction)
from .strategies import (DisguisePolicy, Predictor, choose_perpendicular, disguised_predict,
                         expected_accuracy, expected_accuracy_random_direction,
                         impostor_axis_guess, predict)

__version__ = "0.1.0"
