"""Bundled example datasets used by the docs, demos, and regression tests.

The simulated sets are fixed draws from known two-component generators (see
``cmpmix.sim`` for the generators themselves); the survey and hospital sets
are real frequency tables. ``hospital_days`` has a censored top bin: every
stay of 15 or more days was reported as "15+", which is modeled as the
ordinary top support value.
"""

from __future__ import annotations

from .types import CmpParams, FrequencyTable, MixtureParams, Support


def sim_10pt() -> FrequencyTable:
    """Bimodal 10-point ratings, n=100: peaks at 1 and 10, dip at 3."""
    return FrequencyTable(
        support=Support(1, 10),
        counts=[22, 2, 0, 1, 1, 4, 7, 15, 22, 26],
    )


def sim_5pt() -> FrequencyTable:
    """Bimodal 5-point counts, n=100: peaks at 1 and 5, dip at 2."""
    return FrequencyTable(support=Support(1, 5), counts=[25, 8, 15, 16, 36])


def sim_15pt_broad() -> FrequencyTable:
    """15-point counts, n=1000, with a broad interior peak and an endpoint peak."""
    return FrequencyTable(
        support=Support(1, 15),
        counts=[44, 71, 120, 128, 104, 106, 85, 54, 36, 25, 19, 15, 30, 48, 115],
    )


def sim_15pt_spike() -> FrequencyTable:
    """15-point counts, n=1000, with a sharp spike at 1 and a broad interior peak."""
    return FrequencyTable(
        support=Support(1, 15),
        counts=[302, 115, 24, 13, 21, 37, 51, 81, 80, 84, 64, 49, 36, 30, 13],
    )


def icecream() -> FrequencyTable:
    """Survey responses on ice pieces in an ice-cream product, n=199."""
    return FrequencyTable(
        support=Support(1, 5),
        counts=[39, 9, 75, 52, 24],
        labels=(
            "ice absent",
            "ice present somewhat low",
            "neutral",
            "ice present somewhat high",
            "ice present very high",
        ),
    )


def hospital_days() -> FrequencyTable:
    """Days spent in hospital, censored at 15 ("15+" is the top bin)."""
    return FrequencyTable(
        support=Support(1, 15),
        counts=[9299, 4548, 2882, 1819, 1093, 660, 474, 316, 263, 209, 145, 135, 111, 65, 479],
        labels=tuple(str(v) for v in range(1, 15)) + ("15+",),
    )


# Three parameter combinations that fit sim_10pt nearly identically: the
# likelihood surface is flat along a ridge where raising the second
# component's rate and dispersion together barely changes the mixture pmf.
SIM_10PT_EQUIVALENT_FITS: tuple[MixtureParams, ...] = (
    MixtureParams(p=0.24, comp1=CmpParams(1.13, 3.75), comp2=CmpParams(9.0, 0.8)),
    MixtureParams(p=0.24, comp1=CmpParams(1.13, 3.75), comp2=CmpParams(25.0, 1.27)),
    MixtureParams(p=0.24, comp1=CmpParams(1.13, 3.75), comp2=CmpParams(30.0, 1.36)),
)

BUNDLED = {
    "sim_10pt": sim_10pt,
    "sim_5pt": sim_5pt,
    "sim_15pt_broad": sim_15pt_broad,
    "sim_15pt_spike": sim_15pt_spike,
    "icecream": icecream,
    "hospital_days": hospital_days,
}
