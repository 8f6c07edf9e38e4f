"""Over-parameterized ReLU networks trained from scratch, their kernel baselines,
and numerical checks of the structural lemmas behind them."""
__version__ = "0.1.0"

from .errors import ConstructionFailure, Diverged, InvalidInput, InvalidParameter
from .numerics import make_rng, relu, relu_grad, row_lp_norm, sample_gaussian_matrix, sample_sign_diagonal
from .targets import (ComplexityParams, Dataset, SmoothActivation, ThreeLayerTarget, TwoLayerTarget,
                      builtin_experiment_target, cos_activation, exp_activation, generate_dataset,
                      polynomial_activation, sin_activation, tanh_truncated, train_test_split)
from .networks import (FeatureMap, SignPattern, ThreeLayerNet, TwoLayerNet, conjugate_feature_map,
                       init_three_layer, init_two_layer, load_checkpoint, ntk_feature_map, pseudo_forward,
                       save_checkpoint, sign_pattern)
from .training import (LossFn, RegParams, SGDConfig, SmoothingParams, TrainLog, loss_eval, loss_grad,
                       noisy_sgd, noisy_sgd_inner, objective_L1, objective_L2, regularizer, select_j_star,
                       sgd_three_layer, sgd_two_layer, table1_params, train_linear_baseline)
from .construct import (FitFunction, HermiteBasis, IntervalPartition, build_fit_function,
                        build_interval_partition, construct_two_layer_Wstar, hermite_eval, verify_fit_function)
from .diagnostics import (CouplingReport, count_sign_flips, curvature_probe, generalization_gap, norm_ratio,
                          worst_case_perturbation)
