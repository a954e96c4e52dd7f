"""Learned low-dimensional parameter representations.

Two decoders usable as latent maps for the identification loop:

* a VAE trained to reconstruct normalized parameter vectors, searched
  over [-3, 3]^d per the three-sigma rule of its standard-normal prior;
* a plain autoencoder whose reconstruction loss is the prediction error
  of a frozen learned dynamics network fed the reconstructed parameters,
  which aligns the latent axes with task-relevant parameter combinations.

Plus the dynamics network itself (parameters + state + control in,
reduced next-state observable out).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nn import Adam, Mlp, TrainConfig, TrainingDiverged
from .spaces import ParameterSpace

VAE_LATENT_HALF_WIDTH = 3.0  # three-sigma box of the standard-normal prior


def kl_gaussian(mu, log_var) -> np.ndarray:
    """Per-sample KL( N(mu, exp(log_var)) || N(0, 1) ), summed over dims."""
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    log_var = np.atleast_2d(np.asarray(log_var, dtype=float))
    return 0.5 * np.sum(np.exp(log_var) + mu**2 - 1.0 - log_var, axis=1)


def _decode_through(decoder: Mlp, alpha, lower, upper, space: ParameterSpace) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (decoder.input_dim,):
        raise ValueError(f"latent point must have shape ({decoder.input_dim},)")
    if np.any(alpha < lower) or np.any(alpha > upper):
        raise ValueError("latent point lies outside the search box")
    unit = np.clip(decoder.forward(alpha), 0.0, 1.0)
    return space.denormalize(unit)


# ---------------------------------------------------------------------------
# Variational autoencoder over normalized parameter vectors
# ---------------------------------------------------------------------------

@dataclass
class VaeModel:
    encoder: Mlp  # D -> 2d (mean and log-variance stacked)
    decoder: Mlp  # d -> D
    latent_dim: int
    beta: float
    space: ParameterSpace

    @property
    def latent_lower(self) -> np.ndarray:
        return -VAE_LATENT_HALF_WIDTH * np.ones(self.latent_dim)

    @property
    def latent_upper(self) -> np.ndarray:
        return VAE_LATENT_HALF_WIDTH * np.ones(self.latent_dim)

    def encode(self, theta_norm):
        """(mu, log_var) of the approximate posterior for normalized theta."""
        out = self.encoder.forward(np.asarray(theta_norm, dtype=float))
        return out[..., : self.latent_dim], out[..., self.latent_dim :]

    def decode(self, alpha) -> np.ndarray:
        """Native parameter vector; decoder output clipped into the box."""
        return _decode_through(self.decoder, alpha, self.latent_lower, self.latent_upper,
                               self.space)

    def save(self, path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        self.encoder.save(path / "encoder.npz")
        self.decoder.save(path / "decoder.npz")
        manifest = {
            "kind": "vae",
            "latent_dim": self.latent_dim,
            "beta": self.beta,
            "space": {
                "names": list(self.space.names),
                "lower": self.space.lower.tolist(),
                "upper": self.space.upper.tolist(),
                "grid_res": self.space.grid_res,
            },
        }
        (path / "manifest.json").write_text(json.dumps(manifest, indent=1))

    @classmethod
    def load(cls, path) -> "VaeModel":
        path = Path(path)
        manifest = json.loads((path / "manifest.json").read_text())
        sp = manifest["space"]
        space = ParameterSpace(sp["names"], sp["lower"], sp["upper"], sp["grid_res"])
        return cls(
            Mlp.load(path / "encoder.npz"),
            Mlp.load(path / "decoder.npz"),
            manifest["latent_dim"],
            manifest["beta"],
            space,
        )


def train_vae(
    samples_norm,
    latent_dim: int,
    space: ParameterSpace,
    config: TrainConfig = TrainConfig(),
    hidden: int = 400,
    beta: float = 1.0,
):
    """Train a VAE on normalized parameter samples; returns (model, loss curve).

    Loss per sample: squared reconstruction error plus beta times the
    closed-form Gaussian KL, with the reparameterization z = mu + sigma*eps.
    The KL term is asserted non-negative on every minibatch.
    """
    x = np.atleast_2d(np.asarray(samples_norm, dtype=float))
    dim = x.shape[1]
    if latent_dim >= dim:
        raise ValueError("latent dimension must be below the parameter dimension")
    rng = np.random.default_rng(config.rng_seed)
    encoder = Mlp.init([dim, hidden, 2 * latent_dim], ["relu", "identity"],
                       rng_seed=config.rng_seed)
    decoder = Mlp.init([latent_dim, hidden, dim], ["relu", "identity"],
                       rng_seed=config.rng_seed + 1)
    opt_enc = Adam(encoder, config)
    opt_dec = Adam(decoder, config)

    curve = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(x))
        epoch_loss = 0.0
        for start in range(0, len(x), config.batch_size):
            idx = order[start : start + config.batch_size]
            xb = x[idx]
            n = len(xb)

            enc_out, enc_cache = encoder.forward_cached(xb)
            mu, log_var = enc_out[:, :latent_dim], enc_out[:, latent_dim:]
            kl = kl_gaussian(mu, log_var)
            assert np.all(kl >= -1e-12), "KL term went negative"

            eps = rng.standard_normal(mu.shape)
            sigma = np.exp(0.5 * log_var)
            z = mu + sigma * eps
            rec, dec_cache = decoder.forward_cached(z)

            resid = rec - xb
            loss = float(np.mean(np.sum(resid**2, axis=1) + beta * kl))
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite VAE loss at epoch {epoch}")

            (dec_w, dec_b), dz = decoder.backward(dec_cache, 2.0 * resid / n)
            d_mu = dz + beta * mu / n
            d_lv = dz * eps * 0.5 * sigma + beta * 0.5 * (np.exp(log_var) - 1.0) / n
            (enc_w, enc_b), _ = encoder.backward(enc_cache, np.hstack([d_mu, d_lv]))
            opt_dec.step(decoder, dec_w, dec_b)
            opt_enc.step(encoder, enc_w, enc_b)
            epoch_loss += loss * n
        curve.append(epoch_loss / len(x))
    return VaeModel(encoder, decoder, latent_dim, beta, space), curve


# ---------------------------------------------------------------------------
# Dynamics network: (theta, state, control) -> reduced next-state observable
# ---------------------------------------------------------------------------

@dataclass
class DynamicsNet:
    """MLP over normalized [theta | state | control] features predicting a
    standardized (optionally log1p-compressed) scalar observable."""

    net: Mlp
    space: ParameterSpace
    x_offset: np.ndarray
    x_scale: np.ndarray
    u_offset: np.ndarray
    u_scale: np.ndarray
    y_offset: float
    y_scale: float
    target_transform: str = "identity"  # or "log1p"

    @property
    def state_dim(self) -> int:
        return self.x_offset.size

    @property
    def control_dim(self) -> int:
        return self.u_offset.size

    def features(self, theta, x, u) -> np.ndarray:
        """Stack normalized parameter, state, and control blocks."""
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        tn = self.space.normalize(theta)
        return self.features_from_norm(tn, x, u)

    def features_from_norm(self, theta_norm, x, u) -> np.ndarray:
        parts = [np.atleast_2d(np.asarray(theta_norm, dtype=float))]
        if self.state_dim:
            xs = np.atleast_2d(np.asarray(x, dtype=float))
            parts.append((xs - self.x_offset) / self.x_scale)
        if self.control_dim:
            us = np.atleast_2d(np.asarray(u, dtype=float))
            parts.append((us - self.u_offset) / self.u_scale)
        return np.hstack(parts)

    def transform_target(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        g = np.log1p(y) if self.target_transform == "log1p" else y
        return (g - self.y_offset) / self.y_scale

    def untransform(self, z) -> np.ndarray:
        g = np.asarray(z, dtype=float) * self.y_scale + self.y_offset
        return np.expm1(g) if self.target_transform == "log1p" else g

    def predict(self, theta, x=None, u=None) -> np.ndarray:
        """Observable prediction in native units."""
        feats = self.features(theta, x, u)
        return self.untransform(self.net.forward(feats)[:, 0])

    def predict_transformed(self, feats) -> np.ndarray:
        return self.net.forward(feats)[:, 0]

    def theta_gradient(self, theta_norm, x=None, u=None) -> np.ndarray:
        """Gradient of the transformed output w.r.t. the normalized theta block."""
        feats = self.features_from_norm(theta_norm, x, u)
        out, cache = self.net.forward_cached(feats)
        _, dfeat = self.net.backward(cache, np.ones_like(out))
        return dfeat[:, : self.space.dim]

    def save(self, path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        self.net.save(path / "net.npz")
        manifest = {
            "kind": "dynamics",
            "target_transform": self.target_transform,
            "x_offset": self.x_offset.tolist(),
            "x_scale": self.x_scale.tolist(),
            "u_offset": self.u_offset.tolist(),
            "u_scale": self.u_scale.tolist(),
            "y_offset": self.y_offset,
            "y_scale": self.y_scale,
            "space": {
                "names": list(self.space.names),
                "lower": self.space.lower.tolist(),
                "upper": self.space.upper.tolist(),
                "grid_res": self.space.grid_res,
            },
        }
        (path / "manifest.json").write_text(json.dumps(manifest, indent=1))

    @classmethod
    def load(cls, path) -> "DynamicsNet":
        path = Path(path)
        m = json.loads((path / "manifest.json").read_text())
        sp = m["space"]
        return cls(
            net=Mlp.load(path / "net.npz"),
            space=ParameterSpace(sp["names"], sp["lower"], sp["upper"], sp["grid_res"]),
            x_offset=np.array(m["x_offset"]),
            x_scale=np.array(m["x_scale"]),
            u_offset=np.array(m["u_offset"]),
            u_scale=np.array(m["u_scale"]),
            y_offset=m["y_offset"],
            y_scale=m["y_scale"],
            target_transform=m["target_transform"],
        )


def _moments(a: np.ndarray):
    if a is None or a.size == 0:
        return np.zeros(0), np.ones(0)
    offset = a.mean(axis=0)
    scale = np.maximum(a.std(axis=0), 1e-8)
    return offset, scale


def train_dynamics(
    theta,
    x,
    u,
    y,
    space: ParameterSpace,
    hidden_dims,
    config: TrainConfig = TrainConfig(),
    target_transform: str = "identity",
):
    """Fit the dynamics network on (theta, state, control, observable) rows.

    x may be None for systems whose step does not depend on the state.
    Returns (DynamicsNet, per-epoch loss curve).
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    x = None if x is None else np.atleast_2d(np.asarray(x, dtype=float))
    u = None if u is None else np.atleast_2d(np.asarray(u, dtype=float))
    x_off, x_sc = _moments(x if x is not None else np.zeros((len(y), 0)))
    u_off, u_sc = _moments(u if u is not None else np.zeros((len(y), 0)))
    g = np.log1p(y) if target_transform == "log1p" else y
    y_off, y_sc = float(g.mean()), float(max(g.std(), 1e-8))

    din = space.dim + x_off.size + u_off.size
    net = Mlp.init([din, *hidden_dims, 1],
                   ["relu"] * len(hidden_dims) + ["identity"],
                   rng_seed=config.rng_seed)
    dyn = DynamicsNet(net, space, x_off, x_sc, u_off, u_sc, y_off, y_sc, target_transform)

    feats = dyn.features(theta, x, u)
    targets = dyn.transform_target(y).reshape(-1, 1)
    from .nn import train as train_mlp

    curve = train_mlp(net, feats, targets, config)
    return dyn, curve


# ---------------------------------------------------------------------------
# Autoencoder trained through a frozen dynamics network
# ---------------------------------------------------------------------------

@dataclass
class DynCoupledAe:
    encoder: Mlp  # D -> d
    decoder: Mlp  # d -> D
    dynamics: DynamicsNet
    space: ParameterSpace
    latent_lower: np.ndarray
    latent_upper: np.ndarray
    # affine standardization mapping raw encoder codes onto the search box,
    # so the searched interval is not dominated by decoder-saturated slack
    code_center: np.ndarray = None
    code_half_width: np.ndarray = None

    def __post_init__(self):
        d = self.encoder.output_dim
        if self.code_center is None:
            object.__setattr__(self, "code_center", np.zeros(d))
        if self.code_half_width is None:
            object.__setattr__(self, "code_half_width", np.ones(d))

    @property
    def latent_dim(self) -> int:
        return self.encoder.output_dim

    def _to_alpha(self, code: np.ndarray) -> np.ndarray:
        scale = VAE_LATENT_HALF_WIDTH / self.code_half_width
        return (code - self.code_center) * scale

    def _to_code(self, alpha: np.ndarray) -> np.ndarray:
        scale = self.code_half_width / VAE_LATENT_HALF_WIDTH
        return self.code_center + alpha * scale

    def encode_norm(self, theta_norm) -> np.ndarray:
        return self._to_alpha(self.encoder.forward(np.asarray(theta_norm, dtype=float)))

    def encode(self, theta) -> np.ndarray:
        return self.encode_norm(self.space.normalize(theta))

    def decode(self, alpha) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (self.decoder.input_dim,):
            raise ValueError(f"latent point must have shape ({self.decoder.input_dim},)")
        if np.any(alpha < self.latent_lower) or np.any(alpha > self.latent_upper):
            raise ValueError("latent point lies outside the search box")
        unit = np.clip(self.decoder.forward(self._to_code(alpha)), 0.0, 1.0)
        return self.space.denormalize(unit)

    def save(self, path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        self.encoder.save(path / "encoder.npz")
        self.decoder.save(path / "decoder.npz")
        self.dynamics.save(path / "dynamics")
        manifest = {
            "kind": "dyn-coupled-ae",
            "latent_lower": self.latent_lower.tolist(),
            "latent_upper": self.latent_upper.tolist(),
            "code_center": self.code_center.tolist(),
            "code_half_width": self.code_half_width.tolist(),
            "space": {
                "names": list(self.space.names),
                "lower": self.space.lower.tolist(),
                "upper": self.space.upper.tolist(),
                "grid_res": self.space.grid_res,
            },
        }
        (path / "manifest.json").write_text(json.dumps(manifest, indent=1))

    @classmethod
    def load(cls, path) -> "DynCoupledAe":
        path = Path(path)
        m = json.loads((path / "manifest.json").read_text())
        sp = m["space"]
        return cls(
            encoder=Mlp.load(path / "encoder.npz"),
            decoder=Mlp.load(path / "decoder.npz"),
            dynamics=DynamicsNet.load(path / "dynamics"),
            space=ParameterSpace(sp["names"], sp["lower"], sp["upper"], sp["grid_res"]),
            latent_lower=np.array(m["latent_lower"]),
            latent_upper=np.array(m["latent_upper"]),
            code_center=np.array(m["code_center"]),
            code_half_width=np.array(m["code_half_width"]),
        )


def train_dyn_coupled_ae(
    theta,
    x,
    u,
    y,
    dynamics: DynamicsNet,
    latent_dim: int,
    hidden: int,
    config: TrainConfig = TrainConfig(),
):
    """Train encoder/decoder so that the frozen dynamics net, fed the
    reconstructed parameters, still predicts the observed outcome.

    Loss per row: squared error between the dynamics prediction from the
    reconstructed theta and the transformed true observable. Gradients
    flow through the dynamics network into encoder and decoder only; its
    weights are never touched. Returns (DynCoupledAe, loss curve).
    """
    space = dynamics.space
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    tn = space.normalize(theta)
    y = np.asarray(y, dtype=float).ravel()
    z_true = dynamics.transform_target(y).reshape(-1, 1)
    x = None if x is None else np.atleast_2d(np.asarray(x, dtype=float))
    u = None if u is None else np.atleast_2d(np.asarray(u, dtype=float))
    dim = space.dim

    # Pre-normalized state/control blocks; the theta block is swapped for
    # the reconstruction on every pass.
    base_feats = dynamics.features_from_norm(tn, x, u)
    aux = base_feats[:, dim:]

    rng = np.random.default_rng(config.rng_seed)
    encoder = Mlp.init([dim, hidden, latent_dim], ["relu", "identity"],
                       rng_seed=config.rng_seed)
    decoder = Mlp.init([latent_dim, hidden, dim], ["relu", "identity"],
                       rng_seed=config.rng_seed + 1)
    opt_enc = Adam(encoder, config)
    opt_dec = Adam(decoder, config)
    frozen = dynamics.net.checksum()

    curve = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(tn))
        epoch_loss = 0.0
        for start in range(0, len(tn), config.batch_size):
            idx = order[start : start + config.batch_size]
            n = len(idx)
            code, enc_cache = encoder.forward_cached(tn[idx])
            rec, dec_cache = decoder.forward_cached(code)
            feats = np.hstack([rec, aux[idx]])
            pred, dyn_cache = dynamics.net.forward_cached(feats)
            resid = pred - z_true[idx]
            loss = float(np.mean(resid**2))
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite autoencoder loss at epoch {epoch}")
            _, dfeat = dynamics.net.backward(dyn_cache, 2.0 * resid / n)
            (dec_w, dec_b), dcode = decoder.backward(dec_cache, dfeat[:, :dim])
            (enc_w, enc_b), _ = encoder.backward(enc_cache, dcode)
            opt_dec.step(decoder, dec_w, dec_b)
            opt_enc.step(encoder, enc_w, enc_b)
            epoch_loss += loss * n
        curve.append(epoch_loss / len(tn))

    assert dynamics.net.checksum() == frozen, "dynamics weights changed during AE training"

    # Standardize the code axes so the empirical code range fills the
    # search box; without this most of the box decodes to saturated
    # (clipped) parameters and the search wastes its budget there.
    codes = encoder.forward(tn)
    code_center = (codes.max(axis=0) + codes.min(axis=0)) / 2.0
    code_half_width = np.maximum((codes.max(axis=0) - codes.min(axis=0)) / 2.0, 1e-9)
    half = VAE_LATENT_HALF_WIDTH * np.ones(latent_dim)
    ae = DynCoupledAe(encoder, decoder, dynamics, space, -half, half,
                      code_center, code_half_width)
    return ae, curve
