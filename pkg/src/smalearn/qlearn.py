"""Recurrent deep Q-learning for the recognition environment.

The agent threads a GRU hidden state through the episode, one observation at
a time, and scores actions with a one-hidden-layer arctan network on top of
it.  Replay happens at episode granularity: every sampled episode is unrolled
from a zero hidden state.

All networks are plain numpy with hand-written backpropagation through time.
"""

from __future__ import annotations

import collections
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .automaton import Direction
from .env import EpisodeConfig, Observation, env_step, reset
from .languages import DEFAULT_MAX_LEN, LanguageProfile
from .rng import derive_rng

log = logging.getLogger(__name__)

GRU_KEYS = ("Wz", "Uz", "bz", "Wr", "Ur", "br", "Wc", "Uc", "bc")
HEAD_KEYS = ("W1", "b1", "W2", "b2")


def encoding_size(prof: LanguageProfile) -> int:
    return prof.m + prof.k + prof.way.d


def encode_observation(obs: Observation, prof: LanguageProfile) -> np.ndarray:
    """One-hot symbol, then one-hot head, then one-hot direction."""
    x = np.zeros(encoding_size(prof))
    x[obs.symbol] = 1.0
    x[prof.m + obs.head] = 1.0
    x[prof.m + prof.k + prof.way.directions.index(Direction(obs.direction))] = 1.0
    return x


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


class QNetwork:
    """GRU memory plus arctan Q-head; parameters live in ``self.params``."""

    def __init__(self, params: dict[str, np.ndarray]):
        self.params = params

    @classmethod
    def create(cls, input_dim: int, n_actions: int, hidden: int = 32, head_hidden: int = 32,
               rng: np.random.Generator | None = None) -> "QNetwork":
        """Uniform(+-1/sqrt(hidden)) weights, +-1/sqrt(head_hidden) for the output layer; zeros if ``rng`` is None."""
        shapes = {
            "Wz": (hidden, input_dim), "Uz": (hidden, hidden), "bz": (hidden,),
            "Wr": (hidden, input_dim), "Ur": (hidden, hidden), "br": (hidden,),
            "Wc": (hidden, input_dim), "Uc": (hidden, hidden), "bc": (hidden,),
            "W1": (head_hidden, hidden), "b1": (head_hidden,),
            "W2": (n_actions, head_hidden), "b2": (n_actions,),
        }
        params = {}
        for key, shape in shapes.items():
            if rng is None:
                params[key] = np.zeros(shape)
            else:
                bound = 1.0 / math.sqrt(head_hidden if key in ("W2", "b2") else hidden)
                params[key] = rng.uniform(-bound, bound, size=shape)
        return cls(params)

    @property
    def hidden(self) -> int:
        return self.params["Uz"].shape[0]

    @property
    def n_actions(self) -> int:
        return self.params["b2"].shape[0]

    def copy(self) -> "QNetwork":
        return QNetwork({k: v.copy() for k, v in self.params.items()})

    def initial_state(self, batch: int | None = None) -> np.ndarray:
        return np.zeros(self.hidden if batch is None else (batch, self.hidden))

    def to_json(self) -> dict:
        return {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in self.params.items()}

    @classmethod
    def from_json(cls, doc: dict) -> "QNetwork":
        return cls({k: np.array(v["data"], dtype=float).reshape(v["shape"]) for k, v in doc.items()})


def gru_forward(params: dict, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One GRU step; works on single vectors or row batches."""
    p = params
    z = _sigmoid(x @ p["Wz"].T + h @ p["Uz"].T + p["bz"])
    r = _sigmoid(x @ p["Wr"].T + h @ p["Ur"].T + p["br"])
    c = np.tanh(x @ p["Wc"].T + (r * h) @ p["Uc"].T + p["bc"])
    return (1.0 - z) * h + z * c


def q_values(params: dict, h: np.ndarray) -> np.ndarray:
    return np.arctan(h @ params["W1"].T + params["b1"]) @ params["W2"].T + params["b2"]


def select_action(q: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy; greedy ties go to the lowest index (``np.argmax`` semantics)."""
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(len(q)))
    return int(np.argmax(q))


@dataclass
class Episode:
    """One stored episode: the observation preceding each action, and its outcome."""

    observations: np.ndarray  # (T, input_dim)
    actions: np.ndarray  # (T,)
    rewards: np.ndarray  # (T,)

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def dones(self) -> np.ndarray:
        d = np.zeros(len(self), dtype=bool)
        d[-1] = True
        return d


class ReplayBuffer:
    """FIFO of whole episodes, capacity counted in transitions."""

    def __init__(self, capacity: int = 25_000):
        self.capacity = capacity
        self.episodes: collections.deque[Episode] = collections.deque()
        self.transitions = 0

    def add(self, episode: Episode) -> None:
        if len(episode) > self.capacity:
            raise ValueError(f"episode of {len(episode)} transitions exceeds capacity {self.capacity}")
        self.episodes.append(episode)
        self.transitions += len(episode)
        while self.transitions > self.capacity:
            self.transitions -= len(self.episodes.popleft())

    @property
    def full(self) -> bool:
        """True once the next episode of any length would evict something."""
        return self.transitions >= self.capacity - 1

    def __len__(self) -> int:
        return len(self.episodes)

    def sample(self, count: int, rng: np.random.Generator) -> list[Episode]:
        idx = rng.integers(len(self.episodes), size=count)
        return [self.episodes[i] for i in idx]


@dataclass
class Batch:
    x: np.ndarray  # (B, T, I)
    actions: np.ndarray  # (B, T)
    rewards: np.ndarray  # (B, T)
    dones: np.ndarray  # (B, T)
    mask: np.ndarray  # (B, T)

    @classmethod
    def from_episodes(cls, episodes: list[Episode]) -> "Batch":
        b = len(episodes)
        t = max(len(e) for e in episodes)
        dim = episodes[0].observations.shape[1]
        x = np.zeros((b, t, dim))
        actions = np.zeros((b, t), dtype=np.int64)
        rewards = np.zeros((b, t))
        dones = np.zeros((b, t))
        mask = np.zeros((b, t))
        for i, e in enumerate(episodes):
            n = len(e)
            x[i, :n] = e.observations
            actions[i, :n] = e.actions
            rewards[i, :n] = e.rewards
            dones[i, n - 1] = 1.0
            mask[i, :n] = 1.0
        return cls(x, actions, rewards, dones, mask)


def unroll(params: dict, x: np.ndarray, keep: bool = False):
    """Run the GRU over ``x`` of shape (B, T, I) from a zero state.

    Returns hidden states (B, T, H) and, with ``keep``, the per-step gate
    caches needed by :func:`loss_and_grads`.
    """
    b, t, _ = x.shape
    hidden = params["Uz"].shape[0]
    hs = np.empty((b, t, hidden))
    cache = []
    h = np.zeros((b, hidden))
    p = params
    for i in range(t):
        xt = x[:, i]
        z = _sigmoid(xt @ p["Wz"].T + h @ p["Uz"].T + p["bz"])
        r = _sigmoid(xt @ p["Wr"].T + h @ p["Ur"].T + p["br"])
        c = np.tanh(xt @ p["Wc"].T + (r * h) @ p["Uc"].T + p["bc"])
        if keep:
            cache.append((h, z, r, c))
        h = (1.0 - z) * h + z * c
        hs[:, i] = h
    return (hs, cache) if keep else hs


def td_targets(online: dict, target: dict, batch: Batch, gamma: float) -> np.ndarray:
    """``r_t + gamma * max_a Q_target(h_{t+1}, a) * (1 - done_t)``.

    ``h_{t+1}`` comes from the online GRU unroll; only the Q-head uses the
    target parameters.
    """
    hs = unroll(online, batch.x)
    nxt = np.zeros_like(hs)
    nxt[:, :-1] = hs[:, 1:]
    best = q_values(target, nxt).max(axis=-1)
    return batch.rewards + gamma * best * (1.0 - batch.dones)


def loss_and_grads(params: dict, batch: Batch, y: np.ndarray) -> tuple[float, dict]:
    """Mean squared TD error over valid steps, and its gradient for fixed targets ``y``."""
    p = params
    hs, cache = unroll(p, batch.x, keep=True)
    b, t, hidden = hs.shape
    count = batch.mask.sum()

    pre = hs @ p["W1"].T + p["b1"]  # (B, T, K)
    act = np.arctan(pre)
    q = act @ p["W2"].T + p["b2"]  # (B, T, A)
    q_taken = np.take_along_axis(q, batch.actions[..., None], axis=-1)[..., 0]
    err = (q_taken - y) * batch.mask
    loss = float((err ** 2).sum() / count)

    dq = np.zeros_like(q)
    np.put_along_axis(dq, batch.actions[..., None], (2.0 * err / count)[..., None], axis=-1)
    grads = {k: np.zeros_like(v) for k, v in p.items()}
    grads["W2"] = np.einsum("bta,btk->ak", dq, act)
    grads["b2"] = dq.sum(axis=(0, 1))
    dpre = (dq @ p["W2"]) / (1.0 + pre ** 2)
    grads["W1"] = np.einsum("btk,bth->kh", dpre, hs)
    grads["b1"] = dpre.sum(axis=(0, 1))
    dhs = dpre @ p["W1"]  # (B, T, H)

    dh = np.zeros((b, hidden))
    for i in range(t - 1, -1, -1):
        h_prev, z, r, c = cache[i]
        xt = batch.x[:, i]
        dh = dh + dhs[:, i]
        dz = dh * (c - h_prev)
        dc = dh * z
        dh_prev = dh * (1.0 - z)

        dac = dc * (1.0 - c ** 2)
        grads["Wc"] += dac.T @ xt
        grads["Uc"] += dac.T @ (r * h_prev)
        grads["bc"] += dac.sum(axis=0)
        drh = dac @ p["Uc"]
        dh_prev += drh * r
        dr = drh * h_prev

        daz = dz * z * (1.0 - z)
        grads["Wz"] += daz.T @ xt
        grads["Uz"] += daz.T @ h_prev
        grads["bz"] += daz.sum(axis=0)
        dh_prev += daz @ p["Uz"]

        dar = dr * r * (1.0 - r)
        grads["Wr"] += dar.T @ xt
        grads["Ur"] += dar.T @ h_prev
        grads["br"] += dar.sum(axis=0)
        dh_prev += dar @ p["Ur"]
        dh = dh_prev
    return loss, grads


class Adam:
    def __init__(self, params: dict, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def update(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def clip_gradients(grads: dict, max_norm: float | None) -> float:
    norm = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if max_norm is not None and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


@dataclass
class QConfig:
    gamma: float = 0.999
    epsilon: float = 0.05
    learning_rate: float = 1e-3
    batch_episodes: int = 32
    target_sync_period: int = 1000
    max_env_steps: int = 2_000_000
    buffer_capacity: int = 25_000
    hidden: int = 32
    head_hidden: int = 32
    grad_clip: float | None = 10.0
    history_window: int = 1000
    log_every: int = 1000
    # periodic greedy evaluation; training stops once it reaches target_rate
    eval_every: int = 50_000
    eval_episodes: int = 1000
    target_rate: float | None = None
    max_len: int = DEFAULT_MAX_LEN
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.batch_episodes < 1 or self.target_sync_period < 1:
            raise ValueError("batch_episodes and target_sync_period must be positive")


class QLearner:
    """Online network, target network, optimizer and replay buffer."""

    def __init__(self, prof: LanguageProfile, config: QConfig, net: QNetwork | None = None):
        self.profile = prof
        self.config = config
        self.episode = EpisodeConfig(prof, config.max_len)
        if net is None:
            net = QNetwork.create(encoding_size(prof), self.episode.n_actions, config.hidden,
                                  config.head_hidden, derive_rng(config.seed, "q-init"))
        self.online = net
        self.target = net.copy()
        self.optimizer = Adam(self.online.params, lr=config.learning_rate)
        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.updates = 0

    def train_step(self, rng: np.random.Generator) -> float | None:
        """One gradient update on a sampled batch; ``None`` if the buffer is too small."""
        if len(self.buffer) < self.config.batch_episodes:
            return None
        batch = Batch.from_episodes(self.buffer.sample(self.config.batch_episodes, rng))
        y = td_targets(self.online.params, self.target.params, batch, self.config.gamma)
        loss, grads = loss_and_grads(self.online.params, batch, y)
        clip_gradients(grads, self.config.grad_clip)
        self.optimizer.update(self.online.params, grads)
        self.updates += 1
        if self.updates % self.config.target_sync_period == 0:
            self.sync_target()
        return loss

    def sync_target(self) -> None:
        self.target = sync_target(self.online)


def sync_target(online: QNetwork) -> QNetwork:
    return online.copy()


class QPolicy:
    """Epsilon-greedy actor over a fixed network; ``epsilon=0`` is the greedy policy."""

    def __init__(self, net: QNetwork, prof: LanguageProfile, epsilon: float = 0.0,
                 rng: np.random.Generator | None = None):
        self.net = net
        self.profile = prof
        self.epsilon = epsilon
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.reset()

    def reset(self) -> None:
        self.h = self.net.initial_state()
        self.last_x = None

    def act(self, obs: Observation) -> int:
        x = encode_observation(obs, self.profile)
        self.last_x = x
        self.h = gru_forward(self.net.params, self.h, x)
        return select_action(q_values(self.net.params, self.h), self.epsilon, self.rng)


def play_episode(policy: QPolicy, config: EpisodeConfig, rng: np.random.Generator):
    """Play one episode; returns the stored :class:`Episode` and the final env state."""
    state, obs = reset(config, rng)
    policy.reset()
    xs, actions, rewards = [], [], []
    done = False
    while not done:
        a = policy.act(obs)
        xs.append(policy.last_x)
        actions.append(a)
        state, obs, reward, done = env_step(state, a)
        rewards.append(reward)
    return Episode(np.array(xs), np.array(actions, dtype=np.int64), np.array(rewards)), state


@dataclass
class QResult:
    net: QNetwork
    history: list[dict]
    env_steps: int
    episodes: int
    evaluations: list[dict]


def greedy_rate(net: QNetwork, prof: LanguageProfile, episodes: int, max_len: int,
                rng: np.random.Generator) -> tuple[float, float]:
    """Prediction rate and mean length of the greedy policy over fresh episodes."""
    policy = QPolicy(net, prof, 0.0)
    config = EpisodeConfig(prof, max_len)
    hits = 0
    steps = 0
    for _ in range(episodes):
        ep, state = play_episode(policy, config, rng)
        hits += bool(state.correct)
        steps += len(ep)
    return hits / episodes, steps / episodes


def train_q(prof: LanguageProfile, config: QConfig, on_log=None) -> QResult:
    """Fill the buffer, then train once after every completed episode.

    History rows hold moving averages (over ``history_window`` episodes) of the
    correct-prediction rate and episode length, logged every ``log_every``
    environment steps.
    """
    learner = QLearner(prof, config)
    env_rng = derive_rng(config.seed, "q-env")
    act_rng = derive_rng(config.seed, "q-act")
    replay_rng = derive_rng(config.seed, "q-replay")
    policy = QPolicy(learner.online, prof, config.epsilon, act_rng)
    recent_correct: collections.deque[bool] = collections.deque(maxlen=config.history_window)
    recent_length: collections.deque[int] = collections.deque(maxlen=config.history_window)
    history: list[dict] = []
    evaluations: list[dict] = []
    steps = 0
    episodes = 0
    next_log = config.log_every
    next_eval = config.eval_every
    losses: collections.deque[float] = collections.deque(maxlen=100)
    while steps < config.max_env_steps:
        ep, state = play_episode(policy, learner.episode, env_rng)
        learner.buffer.add(ep)
        steps += len(ep)
        episodes += 1
        recent_correct.append(bool(state.correct))
        recent_length.append(len(ep))
        if learner.buffer.full:
            loss = learner.train_step(replay_rng)
            if loss is not None:
                losses.append(loss)
        while steps >= next_log:
            row = {
                "timesteps": next_log,
                "avg_prediction_rate": float(np.mean(recent_correct)),
                "avg_episode_length": float(np.mean(recent_length)),
            }
            history.append(row)
            next_log += config.log_every
        if config.eval_every and steps >= next_eval:
            next_eval += config.eval_every
            rate, length = greedy_rate(learner.online, prof, config.eval_episodes, config.max_len,
                                       derive_rng(config.seed, "q-eval", steps))
            row = {"timesteps": steps, "greedy_rate": rate, "greedy_length": length,
                   "loss": float(np.mean(losses)) if losses else float("nan")}
            evaluations.append(row)
            log.info("steps %d: greedy rate %.4f length %.2f loss %.4f", steps, rate, length, row["loss"])
            if on_log is not None:
                on_log(row)
            if config.target_rate is not None and rate >= config.target_rate:
                break
    return QResult(learner.online, history, steps, episodes, evaluations)


def save_checkpoint(net: QNetwork, prof: LanguageProfile, config: QConfig, path: str | Path) -> None:
    doc = {"kind": "q", "language": prof.id.value, "config": asdict(config), "params": net.to_json()}
    Path(path).write_text(json.dumps(doc) + "\n")


def write_history(history: list[dict], path: str | Path) -> None:
    lines = ["timesteps,avg_prediction_rate,avg_episode_length"]
    lines += [f"{h['timesteps']},{h['avg_prediction_rate']!r},{h['avg_episode_length']!r}" for h in history]
    Path(path).write_text("\n".join(lines) + "\n")
