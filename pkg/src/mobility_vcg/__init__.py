"""Mobility market: welfare-maximizing traveler/service assignment with externality payments."""

from .fixedpoint import D
from .model import (Assignment, CityNetwork, Link, MobilityService, Subclass, Traveler,
                    TravelRequirements, ValidationError, StructuralError, CapacityError,
                    feasible_services, partition_travelers, validate_assignment)
from .dynamics import (experienced_travel_time, inconvenience, min_payment, operating_cost,
                       utility, valuation)
from .solver import (SolveResult, WelfareInstance, brute_force_oracle, solve_exclusion,
                     solve_welfare_max, welfare)
from .mechanism import MarketOutcome, compute_payment, outside_option, run_market
from .verification import (PROPERTIES, PropertyReport, check_exclusion_lemmas, check_ic,
                           check_ir, check_sustainability, check_utility_identity,
                           check_valuation_floor, replay_ic, verify_instance)
from .scenario import Scenario, emit_report, generate_scenario, load_scenario, save_scenario

__version__ = "0.1.0"
