"""Sequence models with quantum sublayers, trained end to end.

Four architectures share one trainer: an attention model over quantum
q/k/v embeddings fed by either a single feature token or an LSTM over
a 10-step window, a receptance-gated recurrent network whose channel
mixing and attention run on circuit measurements, and a plain
transformer baseline.  Classical parts are torch; circuit calls go
through the autograd bridge.  Everything runs float64 on CPU.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import GradientCheckFailure, InsufficientHistory, NonFiniteActivation
from ..qsim import qasa_template, qrwkv_template
from .base import check_binary_labels
from .bridge import QuantumLayer, quantum_parameters

WINDOW = 10


def build_windows(X: np.ndarray, width: int = WINDOW) -> np.ndarray:
    """Past-inclusive sliding windows: output row t covers input rows
    t .. t+width-1, so window k predicts the label at row k+width-1."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < width:
        raise InsufficientHistory(f"{n} rows < window {width}")
    idx = np.arange(width)[None, :] + np.arange(n - width + 1)[:, None]
    return X[idx]


def sinusoidal_positions(length: int, dim: int) -> np.ndarray:
    pos = np.arange(length, dtype=np.float64)[:, None]
    i = np.arange(dim // 2, dtype=np.float64)[None, :]
    ang = pos / np.power(10000.0, 2.0 * i / dim)
    pe = np.zeros((length, dim))
    pe[:, 0::2] = np.sin(ang)
    pe[:, 1::2] = np.cos(ang)
    return pe


def _causal_mask(t: int) -> torch.Tensor:
    return torch.triu(torch.ones(t, t, dtype=torch.bool), diagonal=1)


# ---------------------------------------------------------------------------
# Networks


class _QasaNet(torch.nn.Module):
    """Token embedding -> three amplitude-encoded circuits for q/k/v ->
    scaled dot-product attention -> feedforward head.

    mode "hybrid": input (B, d_in), one token per sample.
    mode "sequence": input (B, T, d_in), LSTM states become tokens.
    """

    def __init__(self, mode: str, d_in: int, d_embed: int = 16, q_layers: int = 2,
                 lstm_hidden: int = 64, dropout: float = 0.2, causal: bool = True,
                 seed: int = 0):
        super().__init__()
        assert mode in ("hybrid", "sequence")
        self.mode = mode
        self.causal = causal
        self.n_qubits = max(1, math.ceil(math.log2(d_embed)))
        circ = qasa_template(self.n_qubits, q_layers)
        if mode == "sequence":
            self.lstm = torch.nn.LSTM(d_in, lstm_hidden, batch_first=True)
            self.embed = torch.nn.Linear(lstm_hidden, d_embed)
        else:
            self.embed = torch.nn.Linear(d_in, d_embed)
        self.vqc_q = QuantumLayer(circ, seed=(seed, 1))
        self.vqc_k = QuantumLayer(circ, seed=(seed, 2))
        self.vqc_v = QuantumLayer(circ, seed=(seed, 3))
        self.ffn = torch.nn.Sequential(
            torch.nn.Linear(self.n_qubits, d_embed),
            torch.nn.ReLU(),
            torch.nn.Dropout(dropout),
            torch.nn.Linear(d_embed, 1),
        )
        self.last_attention: torch.Tensor | None = None
        self.double()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.mode == "sequence":
            tokens, _ = self.lstm(x)
        else:
            tokens = x.unsqueeze(1)
        e = self.embed(tokens)
        b, t, d = e.shape
        flat = e.reshape(b * t, d)
        q = self.vqc_q(flat).reshape(b, t, -1)
        k = self.vqc_k(flat).reshape(b, t, -1)
        v = self.vqc_v(flat).reshape(b, t, -1)
        scores = q @ k.transpose(-1, -2) / math.sqrt(q.shape[-1])
        if self.causal and t > 1:
            scores = scores.masked_fill(_causal_mask(t), float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        self.last_attention = attn.detach()
        context = (attn @ v)[:, -1]
        return self.ffn(context).squeeze(-1)


class _RwkvLayer(torch.nn.Module):
    """One receptance block: decayed value memory with a sigmoid gate,
    circuit-fed channel mixing, and causal attention over the circuit's
    q/k sub-vectors."""

    def __init__(self, d: int, n_qubits: int = 4, seed: int = 0, slot: int = 0):
        super().__init__()
        circ = qrwkv_template(n_qubits)
        self.n_qubits = n_qubits
        self.to_angles = torch.nn.Linear(d, circ.n_inputs)
        self.vqc = QuantumLayer(circ, seed=(seed, 16 + slot))
        self.w_key = torch.nn.Linear(d, d, bias=False)
        self.w_value = torch.nn.Linear(d, d, bias=False)
        self.w_recept = torch.nn.Linear(2 * d, d)
        # decay exp(-1/tau) with tau = exp(log_tau) > 0, tau init 1
        self.log_tau = torch.nn.Parameter(torch.zeros(d))
        self.w1 = torch.nn.Linear(n_qubits, d)
        self.mlp = torch.nn.Sequential(
            torch.nn.Linear(d, d), torch.nn.GELU(), torch.nn.Linear(d, d))
        self.w2 = torch.nn.Linear(d, d, bias=False)
        self.w3 = torch.nn.Linear(d, d)
        self.ln1 = torch.nn.LayerNorm(d)
        self.ln2 = torch.nn.LayerNorm(d)
        self.last_memory: torch.Tensor | None = None
        self.last_attn_out: torch.Tensor | None = None

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, t, d = x.shape
        h = self.vqc(self.to_angles(x).reshape(b * t, -1)).reshape(b, t, -1)
        half = self.n_qubits // 2
        qv, kv = h[..., :half], h[..., half:]
        u = self.w_key(x)
        v = self.w_value(x)
        lam = torch.exp(-1.0 / torch.exp(self.log_tau))
        mem = x.new_zeros(b, d)
        mems, mems_prev = [], []
        for step in range(t):
            mems_prev.append(mem)
            mem = lam * mem + v[:, step]
            mems.append(mem)
        m = torch.stack(mems, dim=1)
        m_prev = torch.stack(mems_prev, dim=1)
        gate = torch.sigmoid(self.w_recept(torch.cat([x, m_prev], dim=-1)))
        y_time = gate * (u * m)
        h_res = self.ln1(x + y_time)
        z = self.w1(h) + self.w2(self.mlp(x))
        h_mix = torch.nn.functional.gelu(z)
        h_mix_prev = torch.cat([x.new_zeros(b, 1, d), h_mix[:, :-1]], dim=1)
        c = self.w3(h_mix * h_mix_prev)
        scores = qv @ kv.transpose(-1, -2)
        if t > 1:
            scores = scores.masked_fill(_causal_mask(t), float("-inf"))
        y_attn = torch.softmax(scores, dim=-1) @ v
        self.last_memory = m.detach()
        self.last_attn_out = y_attn.detach()
        return self.ln2(h_res + c + y_attn)


class _QrwkvNet(torch.nn.Module):
    def __init__(self, d_in: int, hidden: int = 64, n_layers: int = 4,
                 n_qubits: int = 4, seed: int = 0):
        super().__init__()
        self.in_proj = torch.nn.Linear(d_in, hidden)
        self.layers = torch.nn.ModuleList(
            [_RwkvLayer(hidden, n_qubits, seed=seed, slot=i) for i in range(n_layers)])
        self.head = torch.nn.Linear(hidden, 1)
        self.double()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.in_proj(x)
        for layer in self.layers:
            h = layer(h)
        return self.head(h[:, -1]).squeeze(-1)


class _TransformerNet(torch.nn.Module):
    """Plain post-norm encoder, last-token readout."""

    def __init__(self, d_in: int, d_model: int = 32, heads: int = 4,
                 n_layers: int = 2, d_ff: int = 64, window: int = WINDOW,
                 seed: int = 0):
        super().__init__()
        assert d_model % heads == 0
        self.heads = heads
        self.d_head = d_model // heads
        self.embed = torch.nn.Linear(d_in, d_model)
        self.register_buffer(
            "positions", torch.from_numpy(sinusoidal_positions(window, d_model)))
        self.blocks = torch.nn.ModuleList()
        for _ in range(n_layers):
            self.blocks.append(torch.nn.ModuleDict({
                "wq": torch.nn.Linear(d_model, d_model),
                "wk": torch.nn.Linear(d_model, d_model),
                "wv": torch.nn.Linear(d_model, d_model),
                "wo": torch.nn.Linear(d_model, d_model),
                "ln1": torch.nn.LayerNorm(d_model),
                "ffn": torch.nn.Sequential(
                    torch.nn.Linear(d_model, d_ff),
                    torch.nn.ReLU(),
                    torch.nn.Linear(d_ff, d_model)),
                "ln2": torch.nn.LayerNorm(d_model),
            }))
        self.head = torch.nn.Linear(d_model, 1)
        self.last_attention: torch.Tensor | None = None
        self.double()

    def _attend(self, block, x: torch.Tensor) -> torch.Tensor:
        b, t, d = x.shape
        def split(m):
            return m.reshape(b, t, self.heads, self.d_head).transpose(1, 2)
        q, k, v = split(block["wq"](x)), split(block["wk"](x)), split(block["wv"](x))
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.d_head)
        attn = torch.softmax(scores, dim=-1)
        self.last_attention = attn.detach()
        ctx = (attn @ v).transpose(1, 2).reshape(b, t, d)
        return block["wo"](ctx)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.embed(x) + self.positions[: x.shape[1]]
        for block in self.blocks:
            h = block["ln1"](h + self._attend(block, h))
            h = block["ln2"](h + block["ffn"](h))
        return self.head(h[:, -1]).squeeze(-1)


# ---------------------------------------------------------------------------
# Training


@dataclass
class TrainResult:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    best_epoch: int = -1
    audit_error: float | None = None


def _tensor(X) -> torch.Tensor:
    return torch.as_tensor(np.asarray(X, dtype=np.float64))


def fd_audit(net: torch.nn.Module, X: torch.Tensor, y: torch.Tensor,
             classical_sample: int = 8, h: float = 1e-5, tol: float = 1e-3,
             seed: int = 0) -> float:
    """Difference the composite gradient on one batch.

    Every quantum circuit parameter is checked (that is where the shift
    rules could go wrong); classical coordinates are spot-checked with a
    seeded sample.  Raises GradientCheckFailure above tol.
    """
    net.eval()
    loss_fn = torch.nn.BCEWithLogitsLoss()
    net.zero_grad()
    loss_fn(net(X), y).backward()

    qids = {id(p) for p in quantum_parameters(net)}
    coords: list[tuple[torch.nn.Parameter, int]] = []
    classical_sizes = []
    classical_params = []
    for p in net.parameters():
        if p.grad is None:
            continue
        if id(p) in qids:
            coords.extend((p, c) for c in range(p.numel()))
        else:
            classical_params.append(p)
            classical_sizes.append(p.numel())
    if classical_params:
        total = int(np.sum(classical_sizes))
        rng = np.random.default_rng(seed)
        picks = rng.choice(total, size=min(classical_sample, total), replace=False)
        bounds = np.cumsum([0] + classical_sizes)
        for pick in np.sort(picks):
            which = int(np.searchsorted(bounds, pick, side="right") - 1)
            coords.append((classical_params[which], int(pick - bounds[which])))

    def loss_value() -> float:
        with torch.no_grad():
            return float(loss_fn(net(X), y))

    worst = 0.0
    for p, c in coords:
        flat = p.data.view(-1)
        orig = float(flat[c])
        flat[c] = orig + h
        lp = loss_value()
        flat[c] = orig - h
        lm = loss_value()
        flat[c] = orig
        fd = (lp - lm) / (2.0 * h)
        g = float(p.grad.view(-1)[c])
        worst = max(worst, abs(g - fd) / max(abs(g), abs(fd), 1e-4))
    net.zero_grad()
    if worst > tol:
        raise GradientCheckFailure(f"worst relative error {worst:.3e} > {tol}")
    return worst


def train_net(net: torch.nn.Module, X, y, X_val=None, y_val=None,
              epochs: int = 300, lr: float = 1e-3, lr_quantum: float = 1e-2,
              clip: float = 5.0, patience: int = 30, audit: bool = True,
              seed: int = 0) -> TrainResult:
    """Full-batch Adam with an early stop on validation loss."""
    Xt, yt = _tensor(X), _tensor(y)
    result = TrainResult()
    if audit:
        result.audit_error = fd_audit(net, Xt, yt, seed=seed)
    qparams = quantum_parameters(net)
    qids = {id(p) for p in qparams}
    classical = [p for p in net.parameters() if id(p) not in qids]
    groups = [{"params": classical, "lr": lr}]
    if qparams:
        groups.append({"params": qparams, "lr": lr_quantum})
    opt = torch.optim.Adam(groups, betas=(0.9, 0.999))
    loss_fn = torch.nn.BCEWithLogitsLoss()
    if X_val is not None:
        Xv, yv = _tensor(X_val), _tensor(y_val)
    best_loss = math.inf
    best_state = None
    stall = 0
    for epoch in range(epochs):
        net.train()
        opt.zero_grad()
        logits = net(Xt)
        if not torch.isfinite(logits).all():
            raise NonFiniteActivation(f"epoch {epoch} forward")
        loss = loss_fn(logits, yt)
        loss.backward()
        torch.nn.utils.clip_grad_norm_(net.parameters(), clip)
        opt.step()
        result.train_losses.append(loss.item())
        if X_val is None:
            continue
        net.eval()
        with torch.no_grad():
            vloss = float(loss_fn(net(Xv), yv))
        result.val_losses.append(vloss)
        if vloss < best_loss - 1e-6:
            best_loss = vloss
            best_state = {k: v.detach().clone() for k, v in net.state_dict().items()}
            result.best_epoch = epoch
            stall = 0
        else:
            stall += 1
            if stall >= patience:
                break
    if best_state is not None:
        net.load_state_dict(best_state)
    net.eval()
    return result


# ---------------------------------------------------------------------------
# Model wrappers


class _TorchModel:
    """Shared fit/predict plumbing over a torch net."""

    def __init__(self, epochs: int = 300, lr: float = 1e-3, lr_quantum: float = 1e-2,
                 patience: int = 30):
        self.epochs = epochs
        self.lr = lr
        self.lr_quantum = lr_quantum
        self.patience = patience
        self.net: torch.nn.Module | None = None
        self.result: TrainResult | None = None

    def _build(self, d_in: int, seed: int) -> torch.nn.Module:
        raise NotImplementedError

    def _input_dim(self, X: np.ndarray) -> int:
        return int(np.asarray(X).shape[-1])

    def fit(self, X, y, seed: int = 0, X_val=None, y_val=None, audit: bool = True):
        y = check_binary_labels(y).astype(np.float64)
        torch.manual_seed(seed)
        self.net = self._build(self._input_dim(X), seed)
        self.result = train_net(
            self.net, X, y, X_val=X_val, y_val=y_val, epochs=self.epochs,
            lr=self.lr, lr_quantum=self.lr_quantum, patience=self.patience,
            audit=audit, seed=seed)
        return self

    @property
    def train_losses(self) -> list[float]:
        return [] if self.result is None else self.result.train_losses

    @property
    def val_losses(self) -> list[float]:
        return [] if self.result is None else self.result.val_losses

    def predict_proba(self, X) -> np.ndarray:
        self.net.eval()
        with torch.no_grad():
            return torch.sigmoid(self.net(_tensor(X))).numpy()

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int8)

    def state_arrays(self) -> dict:
        return {k: v.numpy().copy() for k, v in self.net.state_dict().items()}


class QasaHybridModel(_TorchModel):
    """Single-token attention over quantum q/k/v from the 12-feature
    vector."""

    def __init__(self, d_embed: int = 16, q_layers: int = 2, dropout: float = 0.2,
                 **kwargs):
        super().__init__(**kwargs)
        self.d_embed = d_embed
        self.q_layers = q_layers
        self.dropout = dropout

    def _build(self, d_in, seed):
        return _QasaNet("hybrid", d_in, d_embed=self.d_embed,
                        q_layers=self.q_layers, dropout=self.dropout, seed=seed)

    def to_dict(self) -> dict:
        return {"kind": "qasa_hybrid", "d_embed": self.d_embed,
                "q_layers": self.q_layers}


class QasaSequenceModel(_TorchModel):
    """LSTM over a 10-step window, then quantum attention on the hidden
    states.  Causal masking is on by default; causal_mask=False restores
    the unmasked equation."""

    def __init__(self, d_embed: int = 16, q_layers: int = 2, lstm_hidden: int = 64,
                 dropout: float = 0.2, causal_mask: bool = True, **kwargs):
        super().__init__(**kwargs)
        self.d_embed = d_embed
        self.q_layers = q_layers
        self.lstm_hidden = lstm_hidden
        self.dropout = dropout
        self.causal_mask = causal_mask

    def _build(self, d_in, seed):
        return _QasaNet("sequence", d_in, d_embed=self.d_embed,
                        q_layers=self.q_layers, lstm_hidden=self.lstm_hidden,
                        dropout=self.dropout, causal=self.causal_mask, seed=seed)

    def to_dict(self) -> dict:
        return {"kind": "qasa_sequence", "d_embed": self.d_embed,
                "lstm_hidden": self.lstm_hidden, "causal_mask": self.causal_mask}


class QuantumRwkvModel(_TorchModel):
    def __init__(self, hidden: int = 64, n_layers: int = 4, n_qubits: int = 4,
                 **kwargs):
        super().__init__(**kwargs)
        self.hidden = hidden
        self.n_layers = n_layers
        self.n_qubits = n_qubits

    def _build(self, d_in, seed):
        return _QrwkvNet(d_in, hidden=self.hidden, n_layers=self.n_layers,
                         n_qubits=self.n_qubits, seed=seed)

    def to_dict(self) -> dict:
        return {"kind": "quantum_rwkv", "hidden": self.hidden,
                "n_layers": self.n_layers, "n_qubits": self.n_qubits}


class TransformerModel(_TorchModel):
    def __init__(self, d_model: int = 32, heads: int = 4, n_layers: int = 2,
                 d_ff: int = 64, **kwargs):
        super().__init__(**kwargs)
        self.d_model = d_model
        self.heads = heads
        self.n_layers = n_layers
        self.d_ff = d_ff

    def _build(self, d_in, seed):
        return _TransformerNet(d_in, d_model=self.d_model, heads=self.heads,
                               n_layers=self.n_layers, d_ff=self.d_ff, seed=seed)

    def to_dict(self) -> dict:
        return {"kind": "transformer", "d_model": self.d_model,
                "heads": self.heads, "n_layers": self.n_layers}
