"""High-order streamline-diffusion FEM for convection-diffusion problems on
Shishkin and Bakhvalov-Shishkin meshes, with supercloseness and postprocessing."""

from .assembly import StabilizationParams, assemble_galerkin, assemble_sdfem, stabilization_parameters
from .error_norms import EnergyNorm, energy_diff_fe, energy_error_exact
from .fe_space import FEFunction, FESpace, build_space
from .interpolation import (equidistant_interpolate, gl_interpolate, vec_interpolate,
                            verify_lemma_identity)
from .mesh import MeshKind, TensorMesh, build_macro_mesh, build_stype_mesh
from .postprocess import MacroFEFunction, pgl_apply, pvec_apply
from .problem import ExactSolution, ProblemData, model_problem
from .sparse_linalg import SolverError, solve
from .study import StudyConfig, StudyReport, convergence_rate, run_study

__version__ = "0.1.0"
