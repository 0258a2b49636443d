from dataclasses import replace

from sparcsim import samp as amp_core
from sparcsim.decoders.base import Decoder


class SampDecoder(Decoder):
    """SAMP behind the common decoder interface.

    With the offline schedule, prepare() runs state evolution once per
    Eb/N0 point and every trial at that point reuses the result.
    """

    name = "samp"

    def __init__(self, schedule="offline", t_max=25, rel_tol=1e-3, n_mc=2000, early_stop=True):
        self.schedule = amp_core.SeSchedule(schedule, (), t_max, rel_tol, early_stop)
        self.n_mc = n_mc

    def prepare(self, dictionary, cfg, n_antennas, rng):
        if self.schedule.mode == "online":
            return self.schedule
        offline = amp_core.se_offline(
            dictionary,
            cfg.sigma_h_sq,
            cfg.sigma_v_sq,
            n_antennas,
            rng,
            n_mc=self.n_mc,
            t_max=self.schedule.t_max,
            rel_tol=self.schedule.rel_tol,
        )
        return replace(offline, early_stop=self.schedule.early_stop)

    def decode(self, Y, dictionary, cfg, context=None):
        schedule = context if context is not None else self.schedule
        return amp_core.samp_decode(Y, dictionary, cfg.sigma_h_sq, cfg.sigma_v_sq, schedule)

    def describe(self, cfg):
        label = f"samp-{self.schedule.mode}"
        if not self.schedule.early_stop:
            label += f"-t{self.schedule.t_max}"
        return label

