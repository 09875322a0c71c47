"""Sandwiched Renyi divergences, weighted noncommutative Lp norms and recovery maps
on finite-dimensional block algebras."""

from .algebra import (AlgebraElement, BlockStructure, PositiveFunctional, mlog, mpower,
                      order_leq, schatten_norm, support, trace)
from .channels import Channel, apply, petz_dual
from .divergences import (DivergenceValue, alpha_sweep, max_relative, relative_entropy,
                          sandwiched_renyi, standard_renyi)
from .dpi_sufficiency import dpi_report, equality_defect, sufficiency_test
from .lp_kosaki import KosakiElement, duality_map_T, embed_ip, kosaki_norm

__version__ = "0.1.0"
