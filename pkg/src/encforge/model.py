"""Encounter VAEs: bi-directional/cross-coupled generator and the single-GRU baseline.

Both models map a two-vehicle encounter (T steps of [x1, y1, x2, y2]) to a
K-dimensional Gaussian latent code and decode codes back to coordinate
pairs through tanh output heads, so generated coordinates always lie
strictly inside [-1, 1].

The main generator uses a bi-directional GRU encoder and two decoder
branches that exchange hidden states: at every step each branch consumes
its own previous output point together with the *other* branch's previous
hidden state. The baseline uses a single-direction encoder and one decoder
that emits both points jointly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import DimensionError, DomainError, ParamStore, Tape, Tensor
from .data import Encounter
from .optim import Adam
from .recurrent import GATE_CONVENTION, GruParams, gru_cell, run_bigru, run_gru, zero_state

INPUT_WIDTH = 4  # one step carries both vehicles: [x1, y1, x2, y2]


@dataclass
class LatentCode:
    """A latent draw with its posterior parameters."""

    z: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.float64)
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        if not (self.z.shape == self.mu.shape == self.sigma.shape):
            raise DimensionError("latent code fields must share one shape")
        if np.any(self.sigma <= 0):
            raise DomainError("sigma must be strictly positive")


@dataclass
class TrainConfig:
    """Training settings; ``beta`` weighs the KL term of the objective.

    ``kl_per_element`` weighs the KL against the reconstruction term per
    sequence element: the optimized objective is recon + beta/(2T) * KL.
    The reconstruction term is a per-element mean, so an unscaled KL
    outweighs it by orders of magnitude and drives the posterior to the
    prior (the decoder then ignores z entirely); weighting both terms per
    element keeps beta on its usual VAE/beta-VAE scale. Set False for the
    literal recon + beta * KL composition.

    ``kl_warmup_epochs`` linearly anneals the KL weight from 0 up to its
    full value over that many epochs, then holds; 0 disables annealing.
    """

    variant: str = "mtg"
    beta: float = 1.0
    epochs: int = 2000
    batch_size: int = 16
    lr: float = 1e-3
    seed: int = 0
    hidden: int = 64
    latent: int = 10
    teacher_forcing: bool = True
    kl_warmup_epochs: int = 0
    kl_per_element: bool = True
    lr_schedule: str = "constant"

    def __post_init__(self):
        if self.variant not in ("mtg", "baseline1"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.latent < 1 or self.hidden < 1:
            raise ValueError("hidden and latent widths must be >= 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.kl_warmup_epochs < 0:
            raise ValueError("kl_warmup_epochs must be >= 0")
        if self.lr_schedule not in ("constant", "cosine"):
            raise ValueError(f"unknown lr schedule {self.lr_schedule!r}")

    def beta_at(self, epoch: int) -> float:
        if self.kl_warmup_epochs == 0:
            return self.beta
        return self.beta * min(1.0, (epoch + 1) / self.kl_warmup_epochs)

    def lr_at(self, epoch: int) -> float:
        # cosine decay to lr/10; reparameterization noise keeps gradients
        # stochastic even at full batch, so the tail decay sets the floor
        # the final parameters settle to
        if self.lr_schedule == "constant":
            return self.lr
        frac = epoch / max(self.epochs - 1, 1)
        return self.lr * (0.1 + 0.9 * 0.5 * (1.0 + math.cos(math.pi * frac)))


def reparameterize(mu, sigma, noise) -> Tensor:
    """z = mu + sigma * noise; gradients flow to mu and sigma only."""
    mu, sigma = ad.as_tensor(mu), ad.as_tensor(sigma)
    if np.any(sigma.data <= 0):
        raise DomainError("reparameterize: sigma must be strictly positive")
    noise = Tensor(np.asarray(noise, dtype=np.float64))  # constant: no gradient
    return ad.add(mu, ad.hadamard(sigma, noise))


class TrajectoryVAE:
    """Shared machinery of both encounter VAEs.

    Subclasses register their parameters in ``_build`` and implement the
    batched traced passes ``_encode_tensors`` / ``_decode_tensors``; the
    public numpy-facing API lives here.
    """

    variant = ""

    def __init__(self, hidden: int = 64, latent: int = 10, rng=0):
        if hidden < 1 or latent < 1:
            raise ValueError("hidden and latent widths must be >= 1")
        self.hidden = hidden
        self.latent = latent
        self.input_width = INPUT_WIDTH
        self.gate_convention = GATE_CONVENTION
        self.params = ParamStore()
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        self._build(rng)

    def _build(self, rng: np.random.Generator) -> None:
        raise NotImplementedError

    # -- public API ---------------------------------------------------------

    def encode(self, enc: Encounter, sample: bool = False, rng=None) -> LatentCode:
        """Posterior code for one normalized encounter.

        With ``sample=False`` the returned z is exactly the posterior mean.
        """
        X = _encounter_to_array(enc)[None, :, :]
        mu_t, sigma_t = self._encode_tensors(X)
        mu, sigma = mu_t.data[0], sigma_t.data[0]
        if sample:
            if not isinstance(rng, np.random.Generator):
                rng = np.random.default_rng(rng)
            z = mu + sigma * rng.standard_normal(self.latent)
        else:
            z = mu
        return LatentCode(z=z, mu=mu, sigma=sigma)

    def decode(self, z, horizon: int) -> Encounter:
        """Deterministically generate a normalized encounter from a code."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.latent,):
            raise DimensionError(f"expected z of shape ({self.latent},), got {z.shape}")
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        ys1, ys2 = self._decode_tensors(Tensor(z[None, :]), horizon, teacher=None)
        s1 = np.stack([y.data[0] for y in ys1])
        s2 = np.stack([y.data[0] for y in ys2])
        return Encounter(s1=s1, s2=s2, normalized=True)

    # -- traced passes (batch-first arrays in, Tensors out) ------------------

    def _encode_tensors(self, X: np.ndarray):
        raise NotImplementedError

    def _decode_tensors(self, z: Tensor, horizon: int, teacher=None):
        raise NotImplementedError

    def traced_loss(self, X: np.ndarray, noise: np.ndarray, beta: float,
                    teacher_forcing: bool = True):
        """(total, recon, kl) loss tensors for a batch, averaged per example.

        ``noise`` is the frozen standard-normal draw used by the
        reparameterization; pass zeros to train/evaluate at the posterior
        mean. Record on a Tape to backpropagate.
        """
        B, T, _ = X.shape
        mu, sigma = self._encode_tensors(X)
        z = reparameterize(mu, sigma, noise)
        teacher = (X[:, :, 0:2], X[:, :, 2:4]) if teacher_forcing else None
        ys1, ys2 = self._decode_tensors(z, T, teacher=teacher)
        sq = None
        for t in range(T):
            err = ad.add(ad.sum_all(ad.square(ad.sub(ys1[t], X[:, t, 0:2]))),
                         ad.sum_all(ad.square(ad.sub(ys2[t], X[:, t, 2:4]))))
            sq = err if sq is None else ad.add(sq, err)
        recon = ad.scale(sq, 1.0 / (B * T * 2))
        kl = ad.scale(ad.gaussian_kl(mu, sigma), 1.0 / B)
        total = ad.add(recon, ad.scale(kl, beta))
        return total, recon, kl

    def _broadcast_rows(self, vec: Tensor, batch: int) -> Tensor:
        return ad.add(Tensor(np.zeros((batch, vec.shape[-1]))), vec)

    def _affine(self, x: Tensor, W: Tensor, b: Tensor) -> Tensor:
        return ad.add(ad.matmul_t(x, W), b)


def _encounter_to_array(enc: Encounter) -> np.ndarray:
    if np.abs(enc.s1).max() > 1.0 or np.abs(enc.s2).max() > 1.0:
        raise ValueError("encounter coordinates exceed [-1, 1]; normalize first")
    return np.concatenate([enc.s1, enc.s2], axis=1)


class MTG(TrajectoryVAE):
    """Bi-directional encoder + two cross-coupled decoder branches."""

    variant = "mtg"

    def _build(self, rng):
        H, K, s = self.hidden, self.latent, self.params
        self.enc_fwd = GruParams.init(INPUT_WIDTH, H, rng, s, "enc_fwd")
        self.enc_bwd = GruParams.init(INPUT_WIDTH, H, rng, s, "enc_bwd")
        self.W_mu = s.add("head.W_mu", ad.glorot(rng, K, 2 * H))
        self.b_mu = s.add("head.b_mu", np.zeros(K))
        self.W_logvar = s.add("head.W_logvar", ad.glorot(rng, K, 2 * H))
        self.b_logvar = s.add("head.b_logvar", np.zeros(K))
        self.W_init1 = s.add("init1.W", ad.glorot(rng, H, K))
        self.b_init1 = s.add("init1.b", np.zeros(H))
        self.W_init2 = s.add("init2.W", ad.glorot(rng, H, K))
        self.b_init2 = s.add("init2.b", np.zeros(H))
        self.dec1 = GruParams.init(2, H, rng, s, "dec1")
        self.dec2 = GruParams.init(2, H, rng, s, "dec2")
        self.W_out1 = s.add("out1.W", ad.glorot(rng, 2, H))
        self.b_out1 = s.add("out1.b", np.zeros(2))
        self.W_out2 = s.add("out2.W", ad.glorot(rng, 2, H))
        self.b_out2 = s.add("out2.b", np.zeros(2))
        self.start1 = s.add("start1", np.zeros(2))
        self.start2 = s.add("start2", np.zeros(2))

    def _encode_tensors(self, X):
        seq = [Tensor(X[:, t, :]) for t in range(X.shape[1])]
        h_enc = run_bigru(seq, self.enc_fwd, self.enc_bwd)
        mu = self._affine(h_enc, self.W_mu, self.b_mu)
        logvar = self._affine(h_enc, self.W_logvar, self.b_logvar)
        sigma = ad.exp(ad.scale(logvar, 0.5))
        return mu, sigma

    def _decode_tensors(self, z, horizon, teacher=None):
        B = z.shape[0]
        h1 = self._affine(z, self.W_init1, self.b_init1)
        h2 = self._affine(z, self.W_init2, self.b_init2)
        x1 = self._broadcast_rows(self.start1, B)
        x2 = self._broadcast_rows(self.start2, B)
        ys1, ys2 = [], []
        for t in range(horizon):
            # branches swap hidden states: each sees the other's previous one
            h1_next = gru_cell(x1, h2, self.dec1)
            h2_next = gru_cell(x2, h1, self.dec2)
            y1 = ad.tanh(self._affine(h1_next, self.W_out1, self.b_out1))
            y2 = ad.tanh(self._affine(h2_next, self.W_out2, self.b_out2))
            ys1.append(y1)
            ys2.append(y2)
            h1, h2 = h1_next, h2_next
            if teacher is not None:
                x1, x2 = Tensor(teacher[0][:, t, :]), Tensor(teacher[1][:, t, :])
            else:
                x1, x2 = y1, y2
        return ys1, ys2


class Baseline1(TrajectoryVAE):
    """Single-direction encoder + one joint decoder emitting both points."""

    variant = "baseline1"

    def _build(self, rng):
        H, K, s = self.hidden, self.latent, self.params
        self.enc = GruParams.init(INPUT_WIDTH, H, rng, s, "enc")
        self.W_mu = s.add("head.W_mu", ad.glorot(rng, K, H))
        self.b_mu = s.add("head.b_mu", np.zeros(K))
        self.W_logvar = s.add("head.W_logvar", ad.glorot(rng, K, H))
        self.b_logvar = s.add("head.b_logvar", np.zeros(K))
        self.W_init = s.add("init.W", ad.glorot(rng, H, K))
        self.b_init = s.add("init.b", np.zeros(H))
        self.dec = GruParams.init(INPUT_WIDTH, H, rng, s, "dec")
        self.W_out = s.add("out.W", ad.glorot(rng, INPUT_WIDTH, H))
        self.b_out = s.add("out.b", np.zeros(INPUT_WIDTH))
        self.start = s.add("start", np.zeros(INPUT_WIDTH))

    def _encode_tensors(self, X):
        seq = [Tensor(X[:, t, :]) for t in range(X.shape[1])]
        _, h_enc = run_gru(seq, zero_state(seq[0], self.hidden), self.enc)
        mu = self._affine(h_enc, self.W_mu, self.b_mu)
        logvar = self._affine(h_enc, self.W_logvar, self.b_logvar)
        sigma = ad.exp(ad.scale(logvar, 0.5))
        return mu, sigma

    def _decode_tensors(self, z, horizon, teacher=None):
        B = z.shape[0]
        h = self._affine(z, self.W_init, self.b_init)
        x = self._broadcast_rows(self.start, B)
        ys1, ys2 = [], []
        for t in range(horizon):
            h = gru_cell(x, h, self.dec)
            y = ad.tanh(self._affine(h, self.W_out, self.b_out))
            y1, y2 = _split_pair(y)
            ys1.append(y1)
            ys2.append(y2)
            if teacher is not None:
                x = Tensor(np.concatenate([teacher[0][:, t, :], teacher[1][:, t, :]], axis=1))
            else:
                x = y
        return ys1, ys2


def _split_pair(y: Tensor):
    """Split a (B, 4) joint output into two (B, 2) points, gradient-aware."""
    def bw_first(g):
        full = np.zeros(y.shape)
        full[:, 0:2] = g
        ad._accumulate(y, full)

    def bw_second(g):
        full = np.zeros(y.shape)
        full[:, 2:4] = g
        ad._accumulate(y, full)

    first = ad._result(y.data[:, 0:2].copy(), "slice", bw_first if y.requires_grad else None)
    second = ad._result(y.data[:, 2:4].copy(), "slice", bw_second if y.requires_grad else None)
    return first, second


VARIANTS = {"mtg": MTG, "baseline1": Baseline1}


def loss(enc: Encounter, recon: Encounter, mu, sigma, beta: float):
    """Eq-style objective pieces for one encounter: (total, recon, kl)."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if enc.length != recon.length:
        raise DimensionError(
            f"encounter lengths differ: {enc.length} vs {recon.length}")
    recon_term = ad.mse(enc.s1, recon.s1).item() + ad.mse(enc.s2, recon.s2).item()
    kl_term = ad.gaussian_kl(mu, sigma).item()
    return recon_term + beta * kl_term, recon_term, kl_term


def _dataset_to_array(dataset: list[Encounter]) -> np.ndarray:
    if not dataset:
        raise ValueError("dataset is empty")
    T = dataset[0].length
    rows = []
    for i, enc in enumerate(dataset):
        if enc.length != T:
            raise ValueError(
                f"dataset lengths are not uniform: encounter {i} has {enc.length}, expected {T}")
        rows.append(_encounter_to_array(enc))
    return np.stack(rows)


def train(dataset: list[Encounter], cfg: TrainConfig):
    """Minibatch-train a model on normalized encounters.

    Teacher forcing feeds ground-truth previous points to the decoders
    (generation always free-runs). Fully deterministic under ``cfg.seed``.
    Returns the model and a per-epoch list of (total, recon, kl).
    """
    X = _dataset_to_array(dataset)
    N = len(X)
    rng = np.random.default_rng(cfg.seed)
    model = VARIANTS[cfg.variant](hidden=cfg.hidden, latent=cfg.latent, rng=rng)
    opt = Adam(model.params, lr=cfg.lr)
    T = X.shape[1]
    history = []
    for epoch in range(cfg.epochs):
        beta = cfg.beta_at(epoch)
        if cfg.kl_per_element:
            beta = beta / (2 * T)
        opt.lr = cfg.lr_at(epoch)
        perm = rng.permutation(N)
        totals = np.zeros(3)
        for lo in range(0, N, cfg.batch_size):
            idx = perm[lo:lo + cfg.batch_size]
            noise = rng.standard_normal((len(idx), cfg.latent))
            with Tape() as tape:
                total, recon, kl = model.traced_loss(
                    X[idx], noise, beta, teacher_forcing=cfg.teacher_forcing)
                tape.backward(total)
            opt.step()
            totals += len(idx) * np.array([total.item(), recon.item(), kl.item()])
        history.append(tuple(float(v) for v in totals / N))
    return model, history


def reconstruction_error(model: TrajectoryVAE, dataset: list[Encounter],
                         teacher_forcing: bool = True) -> float:
    """Deterministic reconstruction term (z at the posterior mean)."""
    X = _dataset_to_array(dataset)
    _, recon, _ = model.traced_loss(
        X, np.zeros((len(X), model.latent)), beta=0.0, teacher_forcing=teacher_forcing)
    return recon.item()


def latent_sweep(model: TrajectoryVAE, code: int, lo: float = -1.0, hi: float = 1.0,
                 step: float = 0.1, base_z=None, horizon: int = 50):
    """Decode while one code runs from lo to hi; others stay at ``base_z``.

    The grid is uniform with both endpoints exact; defaults give 21 frames.
    Returns a list of (value, Encounter).
    """
    if not 0 <= code < model.latent:
        raise IndexError(f"code {code} out of range for K={model.latent}")
    if step <= 0:
        raise ValueError("step must be positive")
    if hi < lo:
        raise ValueError("hi must be >= lo")
    base = np.zeros(model.latent) if base_z is None else np.asarray(base_z, dtype=np.float64).copy()
    if base.shape != (model.latent,):
        raise DimensionError(f"base_z must have shape ({model.latent},), got {base.shape}")
    n = max(1, round((hi - lo) / step))
    values = [lo + (hi - lo) * (i / n) for i in range(n)] + [hi]
    frames = []
    for v in values:
        z = base.copy()
        z[code] = v
        frames.append((v, model.decode(z, horizon)))
    return frames
