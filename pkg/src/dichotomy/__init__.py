from .bundles import BifurcationCertificate as BifurcationCertificate
from .bundles import certify as certify
from .bundles import End as End
from .bundles import Kind as Kind
from .bundles import sample_subbundle as sample_subbundle
from .bundles import SubbundleFrames as SubbundleFrames
from .bundles import transition_sign as transition_sign
from .bundles import w1_along_loop as w1_along_loop
from .bundles import w1_vector as w1_vector
from .bundles import W1Vector as W1Vector
from .config import ConfigError as ConfigError
from .config import ModelSpec as ModelSpec
from .config import RunConfig as RunConfig
from .config import Tolerances as Tolerances
from .linear import adjoint_apply as adjoint_apply
from .linear import adjoint_recurrence as adjoint_recurrence
from .linear import apply_operator as apply_operator
from .linear import assemble_truncated as assemble_truncated
from .linear import check_A3 as check_A3
from .linear import check_A5 as check_A5
from .linear import fredholm_index as fredholm_index
from .linear import kernel_diagnostics as kernel_diagnostics
from .linear import KernelDiagnostics as KernelDiagnostics
from .linear import LinearFamily as LinearFamily
from .linear import right_inverse_apply as right_inverse_apply
from .linear import splice_check as splice_check
from .linear import TruncatedOperator as TruncatedOperator
from .mesh import make_circle_mesh as make_circle_mesh
from .mesh import make_torus_mesh as make_torus_mesh
from .mesh import ParameterMesh as ParameterMesh
from .mesh import ParameterPoint as ParameterPoint
from .mesh import refine_loop as refine_loop
from .models import build_counterexample as build_counterexample
from .models import build_model as build_model
from .models import build_random as build_random
from .models import build_torus_example as build_torus_example
from .nonlinear import BifurcationReport as BifurcationReport
from .nonlinear import branch_seed as branch_seed
from .nonlinear import certify_bifurcation as certify_bifurcation
from .nonlinear import Conclusion as Conclusion
from .nonlinear import jacobian as jacobian
from .nonlinear import newton_solve as newton_solve
from .nonlinear import NewtonOptions as NewtonOptions
from .nonlinear import NonlinearFamily as NonlinearFamily
from .nonlinear import residual as residual
from .nonlinear import sweep as sweep
from .spectral import DichotomyError as DichotomyError
from .spectral import hyperbolic_splitting as hyperbolic_splitting
from .spectral import HyperbolicityViolation as HyperbolicityViolation
from .spectral import HyperbolicSplitting as HyperbolicSplitting
from .spectral import is_hyperbolic as is_hyperbolic
from .spectral import spectral_projector_contour as spectral_projector_contour
