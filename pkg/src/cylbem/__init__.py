"""Layer potentials for Delta + V on the flat cylinder R x S^1.

The cylinder carries chart coordinates (x, theta) with theta periodic, the
positive Laplacian Delta = -d_x^2 - d_theta^2 and an x-independent potential
V(theta) >= 0.  A region N is bounded by closed curves or by graph curves
that are straight near infinity; nu is the outward normal of N.
"""
from .boundary import (Boundary, BoundaryDiscretization, ClosedCurve, GraphCurve, OffsetCurve,
                       curve_from_dict, discretize, offset_curve)
from .dirichlet import (DiskSource, DtNReport, DirichletSolution, cross_section_domain, dtn,
                        green_representation, normal_derivative_by_extrapolation, solve_dirichlet,
                        solve_strip_fourier, ssinv_solve, strip_dtn_symbol, volume_potential,
                        wellposedness_solve)
from .errors import CylbemError
from .greens import (GreenKernel, image_sum_oracle, kernel_dE, kernel_E, kernel_gradE,
                     kummer_mode_sum, smooth_bump, verify_fundamental)
from .layerops import (LayerOperatorSet, assemble, assemble_K, assemble_Kstar, assemble_S,
                       eval_double, eval_single, eval_single_normal, jump_check, layer_potentials)
from .model import (CylinderModel, RegionSpec, build_model, disk_config, dump_model, load_model,
                    strip_config)
from .spectrum import CrossSectionSpectrum, circle_green, eigensystem, indicial_resolvent_norm
from .taufamily import (ArcDomain, TauFamilyReport, domain_from_model, estimate_suite,
                        rellich_check, solve_arc_dirichlet_oracle, tau_grid, tau_layer_matrices,
                        uniform_bound_sweep)

__version__ = "0.1.0"
