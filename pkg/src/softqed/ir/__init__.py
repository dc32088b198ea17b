"""Infrared analysis of insertion graphs: validation, sectors, power counting, topology."""
from .graph import (SIDES, End, PhotonLine, SideEnd, InsertionGraph, validate, is_valid,
                    make_graph, topologies, coupling_choices, corpus, random_graph)
from .sectors import Sector, sectors, sector_of, parse_sector
from .power import (PoleShape, HalfLine, PowerCountReport, pole_shapes, half_lines,
                    power_count, verdict_for, symbolic_degrees, whole_term_degrees,
                    half_line_detail)
from .topology import (SeparationCertificate, BridgeSet, pole_cuts, cut_choices,
                       detect_separable, is_separable_graph, find_bridge_lines, momentum_shift)
from .classify import (KINDS, SingularityForm, TermSpec, classify_singularity, term_kind,
                       enumerate_terms, term_count)
