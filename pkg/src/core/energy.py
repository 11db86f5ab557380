"""
Household energy-system capacity planning LP.

Variables are Cap_PV and Cap_Bat followed by six dispatch variables per hour
(grid import, PV output, battery charge, battery discharge, battery state,
gas). The hour step is fixed at one hour.
"""

import logging
from typing import Dict

import numpy as np

from ..data.models import EnergyParams, EnergyProfiles, LinearProgram, Sense
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

DEMAND_SUM_RTOL = 1e-6
HOURLY = ("p_Ele", "p_PV", "p_in", "p_out", "p_S", "p_Gas")
CAP_PV, CAP_BAT = 0, 1


def energy_index(hours: int) -> Dict[str, np.ndarray]:
    """Variable indices of each hourly series, plus the two capacities."""
    base = 2 + 6 * np.arange(hours)
    index = {name: base + offset for offset, name in enumerate(HOURLY)}
    index["Cap_PV"] = np.array([CAP_PV])
    index["Cap_Bat"] = np.array([CAP_BAT])
    return index


def build_energy_lp(params: EnergyParams, profiles: EnergyProfiles) -> LinearProgram:
    """
    Capacity-expansion and dispatch LP over len(profiles) hours (minimize cost).

    Per hour: supply balance equals demand, the battery state follows
    state(t) = state(t-1) + p_in(t) - p_out(t) from an empty start, PV output
    is capped by Cap_PV * availability, charge, discharge and state are
    capped by Cap_Bat, and gas is bounded by U_Gas.
    """
    T = profiles.hours
    total = float(profiles.demand.sum())
    if abs(total - params.annual_demand) > DEMAND_SUM_RTOL * max(params.annual_demand, 1.0):
        raise ConfigurationError(
            f"Demand profile sums to {total:.6f} kWh but annual demand is {params.annual_demand} kWh"
        )

    idx = energy_index(T)
    k = 2 + 6 * T
    hours = np.arange(T)

    w = np.zeros(k)
    w[CAP_PV] = params.c_pv
    w[CAP_BAT] = params.c_bat
    w[idx["p_Ele"]] = params.c_ele
    w[idx["p_Gas"]] = params.c_gas

    balance = np.zeros((T, k))
    balance[hours, idx["p_Ele"]] = 1.0
    balance[hours, idx["p_PV"]] = 1.0
    balance[hours, idx["p_out"]] = 1.0
    balance[hours, idx["p_in"]] = -1.0
    balance[hours, idx["p_Gas"]] = 1.0

    storage = np.zeros((T, k))
    storage[hours, idx["p_S"]] = 1.0
    storage[hours[1:], idx["p_S"][:-1]] = -1.0
    storage[hours, idx["p_in"]] = -1.0
    storage[hours, idx["p_out"]] = 1.0

    pv_cap = np.zeros((T, k))
    pv_cap[hours, idx["p_PV"]] = 1.0
    pv_cap[:, CAP_PV] = -profiles.avail_pv

    battery_caps = []
    for name in ("p_in", "p_out", "p_S"):
        rows = np.zeros((T, k))
        rows[hours, idx[name]] = 1.0
        rows[:, CAP_BAT] = -1.0
        battery_caps.append(rows)

    A_ub = np.vstack([pv_cap] + battery_caps)
    bounds = np.column_stack([np.zeros(k), np.full(k, np.inf)])
    bounds[idx["p_Gas"], 1] = params.u_gas

    labels = ["Cap_PV", "Cap_Bat"]
    for t in range(1, T + 1):
        labels.extend(f"{name}[t={t}]" for name in HOURLY)

    logger.debug("Built energy LP with %d hours, %d variables", T, k)
    return LinearProgram(
        sense=Sense.MINIMIZE, w=w,
        A_ub=A_ub, b_ub=np.zeros(A_ub.shape[0]),
        A_eq=np.vstack([balance, storage]),
        b_eq=np.concatenate([profiles.demand, np.zeros(T)]),
        bounds=bounds, labels=tuple(labels),
    )


def synthesize_profiles(hours: int, annual_demand: float) -> EnergyProfiles:
    """
    Synthetic hourly profiles.

    Demand follows 1 + 0.5 sin(2 pi (h - 8) / 24) over the hour of day h,
    rescaled so the horizon sums to annual_demand. PV availability is
    sin(pi (h - 6) / 12) between 06:00 and 18:00 and zero at night.
    """
    if hours < 1:
        raise ConfigurationError(f"Energy horizon must be >= 1 hour, got {hours}")
    hour_of_day = np.arange(hours) % 24
    shape = 1.0 + 0.5 * np.sin(2.0 * np.pi * (hour_of_day - 8) / 24.0)
    demand = shape * (annual_demand / shape.sum())
    daylight = (hour_of_day >= 6) & (hour_of_day <= 18)
    avail = np.where(daylight, np.sin(np.pi * (hour_of_day - 6) / 12.0), 0.0)
    return EnergyProfiles(demand=demand, avail_pv=np.clip(avail, 0.0, 1.0))


def energy_summary(lp: LinearProgram, x: np.ndarray, params: EnergyParams,
                   profiles: EnergyProfiles) -> Dict[str, float]:
    """Comparison-table row for one solved energy LP."""
    idx = energy_index(profiles.hours)
    con_ele = float(x[idx["p_Ele"]].sum())
    con_gas = float(x[idx["p_Gas"]].sum())
    demand = float(profiles.demand.sum())
    capex = params.c_pv * float(x[CAP_PV]) + params.c_bat * float(x[CAP_BAT])
    return {
        "Cap_PV": float(x[CAP_PV]),
        "Cap_Bat": float(x[CAP_BAT]),
        "Self-Gen": (demand - con_ele - con_gas) / demand if demand > 0 else 0.0,
        "TOTEX": lp.objective_value(x),
        "CAPEX": capex,
        "Con_Gas": con_gas,
        "Con_Ele": con_ele,
        "w_PV": params.c_pv,
    }


def balance_residuals(x: np.ndarray, profiles: EnergyProfiles) -> np.ndarray:
    """Per-hour supply minus demand."""
    idx = energy_index(profiles.hours)
    supply = x[idx["p_Ele"]] + x[idx["p_PV"]] + x[idx["p_out"]] - x[idx["p_in"]] + x[idx["p_Gas"]]
    return supply - profiles.demand


def storage_residuals(x: np.ndarray, hours: int) -> np.ndarray:
    """Per-hour violation of state(t) = state(t-1) + p_in(t) - p_out(t)."""
    idx = energy_index(hours)
    state = x[idx["p_S"]]
    previous = np.concatenate([[0.0], state[:-1]])
    return state - previous - x[idx["p_in"]] + x[idx["p_out"]]
