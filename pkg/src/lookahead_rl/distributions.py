"""Finitely supported joint distributions over per-action outcome vectors.

A joint distribution with arity A describes one outcome per action: a reward
vector in [0,1]^A or a next-state vector in {0..S-1}^A.  Two representations
are supported: an explicit list of weighted atoms, and an independent product
of per-action marginals.  Product supports are expanded lazily and only on
demand, since the Cartesian size can be large.
"""

import itertools

import numpy as np

WEIGHT_TOL = 1e-12       # weights must sum to 1 within this at construction
RENORM_TOL = 1e-9        # loaders may renormalize drift up to this, not past it

REWARD_DOMAIN = "reward"
STATE_DOMAIN = "state"


def _as_weights(w, tol=WEIGHT_TOL):
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-d array")
    if np.any(w < 0):
        raise ValueError("negative weight in distribution")
    if abs(w.sum() - 1.0) > tol:
        raise ValueError(f"weights sum to {w.sum()!r}, expected 1 within {tol}")
    return w


class JointFiniteDistribution:
    """Joint law of one outcome per action.

    kind is "joint" (explicit weighted atoms, deduplicated) or "product"
    (independent per-action marginals).  domain is "reward" (floats in [0,1])
    or "state" (ints in {0..num_values-1}; num_values required).
    """

    def __init__(self, arity, kind, domain, atoms=None, marginals=None, num_values=None):
        if arity < 1:
            raise ValueError("arity must be a positive integer")
        if domain not in (REWARD_DOMAIN, STATE_DOMAIN):
            raise ValueError(f"unknown domain {domain!r}")
        if domain == STATE_DOMAIN and (num_values is None or num_values < 1):
            raise ValueError("state-valued distributions need num_values >= 1")
        self.arity = int(arity)
        self.kind = kind
        self.domain = domain
        self.num_values = int(num_values) if num_values is not None else None
        self._support = None  # cached (weights, outcomes) expansion

        if kind == "joint":
            if atoms is None:
                raise ValueError("joint kind needs atoms")
            weights, outcomes = atoms
            weights = _as_weights(weights)
            outcomes = np.asarray(outcomes)
            if outcomes.ndim != 2 or outcomes.shape != (weights.size, self.arity):
                raise ValueError("atom outcomes must have shape (num_atoms, arity)")
            weights, outcomes = self._dedup(weights, outcomes)
            self._check_values(outcomes)
            self.weights = weights
            self.outcomes = outcomes
            self._cum = np.cumsum(weights)
            self.marginals = None
        elif kind == "product":
            if marginals is None:
                raise ValueError("product kind needs marginals")
            if len(marginals) != self.arity:
                raise ValueError(f"expected {self.arity} marginals, got {len(marginals)}")
            cleaned = []
            for values, probs in marginals:
                probs = _as_weights(probs)
                values = np.asarray(values)
                if values.shape != probs.shape:
                    raise ValueError("marginal values and probs must align")
                self._check_values(values[None, :])
                cleaned.append((values, probs))
            self.marginals = cleaned
            self._marg_cum = [np.cumsum(p) for _, p in cleaned]
            self.weights = None
            self.outcomes = None
        else:
            raise ValueError(f"unknown kind {kind!r}")

    def _check_values(self, outcomes):
        if self.domain == REWARD_DOMAIN:
            out = np.asarray(outcomes, dtype=float)
            if out.size and (out.min() < 0.0 or out.max() > 1.0):
                raise ValueError("reward outcomes must lie in [0,1]")
        else:
            out = np.asarray(outcomes)
            if not np.issubdtype(out.dtype, np.integer):
                if np.any(out != np.floor(out)):
                    raise ValueError("state outcomes must be integers")
            if out.size and (out.min() < 0 or out.max() >= self.num_values):
                raise ValueError("state outcome out of range")

    def _dedup(self, weights, outcomes):
        # merge repeated outcome vectors, keeping first-seen order
        seen = {}
        order = []
        for i in range(weights.size):
            key = tuple(outcomes[i].tolist())
            if key in seen:
                seen[key] += weights[i]
            else:
                seen[key] = weights[i]
                order.append(key)
        if len(order) == weights.size:
            return weights, outcomes
        w = np.array([seen[k] for k in order])
        dtype = int if self.domain == STATE_DOMAIN else float
        x = np.array(order, dtype=dtype)
        return w, x

    # -- constructors -------------------------------------------------------

    @classmethod
    def explicit(cls, weights, outcomes, domain, num_values=None):
        outcomes = np.asarray(outcomes)
        return cls(outcomes.shape[1], "joint", domain, atoms=(weights, outcomes),
                   num_values=num_values)

    @classmethod
    def product(cls, marginals, domain, num_values=None):
        return cls(len(marginals), "product", domain, marginals=marginals,
                   num_values=num_values)

    @classmethod
    def point(cls, vector, domain, num_values=None):
        vector = np.asarray(vector)
        return cls.explicit(np.array([1.0]), vector[None, :], domain, num_values)

    # -- basic queries ------------------------------------------------------

    @property
    def support_size(self):
        """Number of outcome vectors carrying mass (product sizes multiply)."""
        if self.kind == "joint":
            return self.weights.size
        n = 1
        for values, _ in self.marginals:
            n *= values.size
        return n

    def support(self, cap=None):
        """Weighted support as (weights (m,), outcomes (m, arity)).

        Product marginals are expanded to their Cartesian product.  cap, if
        given, bounds the expansion size; exceeding it raises ValueError.
        """
        if cap is not None and self.support_size > cap:
            raise ValueError(f"support size {self.support_size} exceeds cap {cap}")
        if self._support is None:
            if self.kind == "joint":
                self._support = (self.weights, self.outcomes)
            else:
                vals = [v for v, _ in self.marginals]
                probs = [p for _, p in self.marginals]
                grids = list(itertools.product(*[range(v.size) for v in vals]))
                idx = np.array(grids, dtype=int)  # (m, arity) of marginal indices
                w = np.ones(idx.shape[0])
                for a in range(self.arity):
                    w = w * probs[a][idx[:, a]]
                dtype = int if self.domain == STATE_DOMAIN else float
                x = np.empty(idx.shape, dtype=dtype)
                for a in range(self.arity):
                    x[:, a] = vals[a][idx[:, a]]
                self._support = (w, x)
        return self._support

    def means(self):
        """Per-action expected outcome, shape (arity,)."""
        if self.kind == "joint":
            return self.weights @ self.outcomes
        return np.array([float(v @ p) for v, p in self.marginals])

    def marginal_probs(self, action):
        """Dense marginal over {0..num_values-1} for one action (state domain)."""
        if self.domain != STATE_DOMAIN:
            raise ValueError("dense marginals are defined for the state domain")
        out = np.zeros(self.num_values)
        if self.kind == "joint":
            np.add.at(out, self.outcomes[:, action].astype(int), self.weights)
        else:
            values, probs = self.marginals[action]
            np.add.at(out, values.astype(int), probs)
        return out

    # -- sampling -----------------------------------------------------------

    def sample(self, rng):
        """One outcome vector of shape (arity,)."""
        return self.sample_many(rng, 1)[0]

    def sample_many(self, rng, n):
        """n outcome vectors, shape (n, arity); consumes n*(1 or arity) uniforms."""
        if self.kind == "joint":
            u = rng.random(n)
            idx = np.minimum(np.searchsorted(self._cum, u, side="right"),
                             self.weights.size - 1)
            return self.outcomes[idx]
        u = rng.random((n, self.arity))
        dtype = int if self.domain == STATE_DOMAIN else float
        out = np.empty((n, self.arity), dtype=dtype)
        for a in range(self.arity):
            values, _ = self.marginals[a]
            idx = np.minimum(np.searchsorted(self._marg_cum[a], u[:, a], side="right"),
                             values.size - 1)
            out[:, a] = values[idx]
        return out

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        if self.kind == "joint":
            return {"kind": "joint",
                    "atoms": [[float(w), out.tolist()]
                              for w, out in zip(self.weights, self.outcomes)]}
        return {"kind": "product",
                "marginals": [[[_scalar(v), float(p)] for v, p in zip(values, probs)]
                              for values, probs in self.marginals]}

    @classmethod
    def from_dict(cls, data, domain, arity, num_values=None):
        """Inverse of to_dict; renormalizes weight drift up to RENORM_TOL."""
        kind = data.get("kind")
        if kind == "joint":
            atoms = data["atoms"]
            w = _renormalize(np.array([a[0] for a in atoms], dtype=float))
            x = np.array([a[1] for a in atoms])
            return cls(arity, "joint", domain, atoms=(w, x), num_values=num_values)
        if kind == "product":
            marginals = []
            for marg in data["marginals"]:
                v = np.array([m[0] for m in marg])
                p = _renormalize(np.array([m[1] for m in marg], dtype=float))
                marginals.append((v, p))
            return cls(arity, "product", domain, marginals=marginals,
                       num_values=num_values)
        raise ValueError(f"unknown distribution kind {kind!r}")


def _scalar(v):
    return int(v) if np.issubdtype(np.asarray(v).dtype, np.integer) else float(v)


def _renormalize(w):
    total = w.sum()
    if abs(total - 1.0) > RENORM_TOL:
        raise ValueError(f"weights sum to {total!r}, drift exceeds {RENORM_TOL}")
    return w / total


# convenience marginal builders

def bernoulli_marginal(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError("Bernoulli parameter must lie in [0,1]")
    return (np.array([0.0, 1.0]), np.array([1.0 - p, p]))


def point_marginal(value):
    return (np.asarray([value]), np.array([1.0]))


def categorical_marginal(probs):
    probs = np.asarray(probs, dtype=float)
    return (np.arange(probs.size), probs)
