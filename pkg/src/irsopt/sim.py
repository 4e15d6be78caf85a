"""Scenario configuration, geometry, path loss and channel generation.

Distances are meters, powers enter in dBm and are converted to watts at the
instance boundary. Path loss is the textbook power law
gain = 10^(c0_db/10) * d^(-alpha). The reference gain and the noise floors
are calibration constants, not physical claims: they set the absolute SNR
scale of the synthetic scenarios and are recorded in every output file.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .secrecy import SecrecyInstance
from .wsr import WsrInstance

# distances below one meter would blow up the power law; clamp instead
MIN_DISTANCE = 1.0


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * np.log10(watts) + 30.0


def path_loss(distance, alpha, c0_db=-30.0):
    """Linear power gain at a distance in meters."""
    d = max(float(distance), MIN_DISTANCE)
    return 10.0 ** (c0_db / 10.0) * d ** (-alpha)


@dataclasses.dataclass
class ScenarioConfig:
    """Declarative description of one simulated scenario.

    kind selects the application ('secrecy' or 'wsr'); the r_* distances
    are the secrecy geometry, the ap/user fields the downlink geometry in
    which the access point sits at the origin, the surface on the x-axis,
    and users are drawn uniformly from a disc behind the surface.
    """

    kind: str = "secrecy"
    n_t: int = 5
    m: int = 60
    k_users: int = 4
    p_dbm: float = 5.0
    alpha: float = 4.0
    c0_db: float = -30.0
    r_tr: float = 250.0
    r_rl: float = 160.0
    r_re: float = 160.0
    sigma2_l_dbm: float = -240.0
    sigma2_e_dbm: float = -240.0
    sigma2_dbm: float = -80.0
    ap_irs_distance: float = 50.0
    user_center_offset: float = 5.0
    user_disc_radius: float = 10.0
    fading: str = "rayleigh"
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("secrecy", "wsr"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.fading not in ("rayleigh", "ones"):
            raise ValueError(f"unknown fading model {self.fading!r}")
        if min(self.n_t, self.m, self.k_users) < 1:
            raise ValueError("dimensions must be at least 1")

    def to_text(self):
        """Serialize as 'key = value' lines, one per field."""
        lines = []
        for field in dataclasses.fields(self):
            lines.append(f"{field.name} = {getattr(self, field.name)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        """Parse the key-value form written by to_text. Unknown keys and
        malformed lines raise ValueError."""
        known = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, _, rhs = line.partition("=")
            key = key.strip()
            rhs = rhs.strip()
            if key not in known:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            ann = known[key]
            try:
                if ann in ("str", str):
                    values[key] = rhs.strip("'\"")
                elif ann in ("int", int):
                    values[key] = int(rhs)
                else:
                    values[key] = float(rhs)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad value for {key}: {rhs!r}") from exc
        return cls(**values)


def fig_secrecy_wide():
    """Secrecy scenario with equal legitimate/eavesdropper distances."""
    return ScenarioConfig(kind="secrecy", n_t=5, m=60, p_dbm=5.0, alpha=4.0,
                          r_tr=250.0, r_rl=160.0, r_re=160.0)


def fig_secrecy_near_eve():
    """Secrecy scenario with the eavesdropper closer than the user."""
    return ScenarioConfig(kind="secrecy", n_t=10, m=60, p_dbm=5.0, alpha=4.0,
                          r_tr=200.0, r_rl=150.0, r_re=100.0)


def wsr_default():
    """Four-user downlink scenario."""
    return ScenarioConfig(kind="wsr", n_t=4, m=20, k_users=4, p_dbm=10.0,
                          alpha=2.2)


def child_rng(seed, index):
    """Independent generator for one realization; identical whether
    realizations run serially or in parallel."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))


def _fading(rng, shape, mode):
    if mode == "ones":
        return np.ones(shape, complex)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def gen_rayleigh(rng, shape):
    """Unit-variance circularly symmetric complex Gaussian draw."""
    return _fading(rng, shape, "rayleigh")


def gen_secrecy_instance(cfg, rng):
    """Draw channels for the secrecy geometry."""
    pl_tr = path_loss(cfg.r_tr, cfg.alpha, cfg.c0_db)
    pl_rl = path_loss(cfg.r_rl, cfg.alpha, cfg.c0_db)
    pl_re = path_loss(cfg.r_re, cfg.alpha, cfg.c0_db)
    g = np.sqrt(pl_tr) * _fading(rng, (cfg.m, cfg.n_t), cfg.fading)
    h_l = np.sqrt(pl_rl) * _fading(rng, cfg.m, cfg.fading)
    h_e = np.sqrt(pl_re) * _fading(rng, cfg.m, cfg.fading)
    return SecrecyInstance(
        G=g, h_l=h_l, h_e=h_e,
        sigma2_l=dbm_to_watts(cfg.sigma2_l_dbm),
        sigma2_e=dbm_to_watts(cfg.sigma2_e_dbm),
        power=dbm_to_watts(cfg.p_dbm),
    )


def gen_wsr_instance(cfg, rng):
    """Draw user positions and channels for the downlink geometry."""
    irs = np.array([cfg.ap_irs_distance, 0.0])
    center = np.array([cfg.ap_irs_distance + cfg.user_center_offset, 0.0])
    k = cfg.k_users
    positions = np.empty((k, 2))
    for j in range(k):
        radius = cfg.user_disc_radius * np.sqrt(rng.uniform())
        angle = 2.0 * np.pi * rng.uniform()
        positions[j] = center + radius * np.array([np.cos(angle), np.sin(angle)])
    g = np.sqrt(path_loss(cfg.ap_irs_distance, cfg.alpha, cfg.c0_db)) \
        * _fading(rng, (cfg.m, cfg.n_t), cfg.fading)
    h_r = np.empty((k, cfg.m), complex)
    h_d = np.empty((k, cfg.n_t), complex)
    for j in range(k):
        d_irs = np.linalg.norm(positions[j] - irs)
        d_ap = np.linalg.norm(positions[j])
        h_r[j] = np.sqrt(path_loss(d_irs, cfg.alpha, cfg.c0_db)) \
            * _fading(rng, cfg.m, cfg.fading)
        h_d[j] = np.sqrt(path_loss(d_ap, cfg.alpha, cfg.c0_db)) \
            * _fading(rng, cfg.n_t, cfg.fading)
    return WsrInstance(
        h_d=h_d, h_r=h_r, G=g, omega=np.ones(k),
        sigma2=dbm_to_watts(cfg.sigma2_dbm),
        power=dbm_to_watts(cfg.p_dbm),
    )


def gen_instance(cfg, rng):
    """Dispatch on cfg.kind."""
    if cfg.kind == "secrecy":
        return gen_secrecy_instance(cfg, rng)
    return gen_wsr_instance(cfg, rng)
