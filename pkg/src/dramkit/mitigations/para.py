"""Probabilistic adjacent row activation."""

from __future__ import annotations

from ..errors import BadParameter
from .base import RowHammerPlugin

# per-victim failure probability used when sizing p from a threshold
TARGET_FAILURE = 1e-15


class PARA(RowHammerPlugin):
    """On each activation, refresh its neighbours with probability ``p``.

    Activations caused by PARA's own refreshes do not draw, so ``p = 1``
    refreshes exactly once per demand activation instead of cascading.
    """

    params = {"p": 0.01, "blast_radius": 1}

    @classmethod
    def validate(cls, params: dict, path: str) -> None:
        if not 0.0 <= params["p"] <= 1.0:
            raise BadParameter(f"{path}.p", "must lie in [0, 1]")
        if params["blast_radius"] < 1:
            raise BadParameter(f"{path}.blast_radius", "must be >= 1")

    @classmethod
    def for_threshold(cls, t_rh: int) -> dict:
        """p such that t_rh unrefreshed activations occur with probability TARGET_FAILURE."""
        return {"p": 1.0 - TARGET_FAILURE ** (1.0 / t_rh)}

    def bind(self, host) -> None:
        super().bind(host)
        self.rng = host.rng("PARA")
        self.prob = self.p["p"]
        self.draws = 0

    def on_activate(self, bank: tuple, row: int, clk: int, own: bool) -> None:
        if own:
            return
        self.draws += 1
        if self.rng.random() < self.prob:
            self.refresh_victims(bank, row)

    def stats(self) -> dict:
        return {"draws": self.draws, **super().stats()}
