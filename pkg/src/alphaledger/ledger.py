"""The alpha-investing wealth ledger.

A ledger starts with wealth ``eta * alpha``. Each hypothesis is assigned a
budget by the configured investing policy; if its p-value is at or below
the budget the null is rejected and the ledger earns ``omega``, otherwise
``budget / (1 - budget)`` is deducted. Any policy following this update
rule controls the marginal FDR at level ``alpha``.

Five policies are provided:

* ``Farsighted(beta)`` -- always preserves a fraction ``beta`` of wealth
  (thrifty; never exhausts for ``beta > 0``).
* ``Fixed(gamma)`` -- constant budget ``W0 / (gamma + W0)``; acceptance
  costs exactly ``W0 / gamma``.
* ``Hopeful(delta)`` -- re-invests the wealth held after the most recent
  rejection across the next ``delta`` hypotheses.
* ``Hybrid(epsilon, ...)`` -- switches between Fixed- and Hopeful-style
  budgets based on the rejection rate over a sliding window; skips
  (rather than caps) unaffordable hypotheses.
* ``Support(psi, base)`` -- scales a Fixed budget by
  ``support_fraction ** psi`` so thinly-supported hypotheses get less.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

from .errors import (
    AccountingError,
    ConfigError,
    ExhaustionError,
    MissingInputError,
)

# Wealth within this of zero is treated as zero (floating-point hygiene).
WEALTH_TOL = 1e-12
# Hybrid/Support declare exhaustion only once no budget above this is
# affordable; smaller shortfalls skip the hypothesis and keep going.
SKIP_WEALTH_FLOOR = 1e-9


@dataclass(frozen=True)
class Farsighted:
    """Preserve at least a fraction ``beta`` of wealth on every step."""

    beta: float = 0.25


@dataclass(frozen=True)
class Fixed:
    """Constant budget: a 1/gamma share of the initial wealth per test."""

    gamma: float = 10.0


@dataclass(frozen=True)
class Hopeful:
    """Spread the wealth held after the last rejection over delta tests."""

    delta: float = 10.0


@dataclass(frozen=True)
class Hybrid:
    """Fixed-style while the recent rejection rate is at most epsilon, else Hopeful-style.

    ``window`` is the number of recent tested hypotheses considered;
    ``None`` means unbounded.
    """

    epsilon: float = 0.5
    gamma: float = 10.0
    delta: float = 10.0
    window: Optional[int] = None


@dataclass(frozen=True)
class Support:
    """Scale a Fixed budget by support_fraction ** psi."""

    psi: float = 0.5
    base: Fixed = field(default_factory=Fixed)


PolicyConfig = Union[Farsighted, Fixed, Hopeful, Hybrid, Support]

_POLICY_NAMES = {
    Farsighted: "farsighted",
    Fixed: "fixed",
    Hopeful: "hopeful",
    Hybrid: "hybrid",
    Support: "support",
}


def validate_policy(policy: PolicyConfig) -> None:
    if isinstance(policy, Farsighted):
        if not 0.0 <= policy.beta < 1.0:
            raise ConfigError(f"farsighted beta must be in [0, 1), got {policy.beta!r}")
    elif isinstance(policy, Fixed):
        if policy.gamma <= 0.0:
            raise ConfigError(f"fixed gamma must be positive, got {policy.gamma!r}")
    elif isinstance(policy, Hopeful):
        if policy.delta <= 0.0:
            raise ConfigError(f"hopeful delta must be positive, got {policy.delta!r}")
    elif isinstance(policy, Hybrid):
        if not 0.0 <= policy.epsilon <= 1.0:
            raise ConfigError(f"hybrid epsilon must be in [0, 1], got {policy.epsilon!r}")
        if policy.gamma <= 0.0 or policy.delta <= 0.0:
            raise ConfigError("hybrid gamma and delta must be positive")
        if policy.window is not None and policy.window < 1:
            raise ConfigError(f"hybrid window must be >= 1 or None, got {policy.window!r}")
    elif isinstance(policy, Support):
        if policy.psi <= 0.0:
            raise ConfigError(f"support psi must be positive, got {policy.psi!r}")
        if not isinstance(policy.base, Fixed):
            raise ConfigError("support base policy must be Fixed")
        validate_policy(policy.base)
    else:
        raise ConfigError(f"unknown policy {policy!r}")


def policy_name(policy: PolicyConfig) -> str:
    return _POLICY_NAMES[type(policy)]


def policy_to_dict(policy: PolicyConfig) -> dict:
    if isinstance(policy, Farsighted):
        return {"name": "farsighted", "beta": policy.beta}
    if isinstance(policy, Fixed):
        return {"name": "fixed", "gamma": policy.gamma}
    if isinstance(policy, Hopeful):
        return {"name": "hopeful", "delta": policy.delta}
    if isinstance(policy, Hybrid):
        return {
            "name": "hybrid",
            "epsilon": policy.epsilon,
            "gamma": policy.gamma,
            "delta": policy.delta,
            "window": policy.window,
        }
    if isinstance(policy, Support):
        return {"name": "support", "psi": policy.psi, "gamma": policy.base.gamma}
    raise ConfigError(f"unknown policy {policy!r}")


def policy_from_dict(data: dict) -> PolicyConfig:
    try:
        name = data["name"]
    except (KeyError, TypeError):
        raise ConfigError(f"policy spec needs a 'name': {data!r}") from None
    params = {k: v for k, v in data.items() if k != "name"}
    try:
        if name == "farsighted":
            policy: PolicyConfig = Farsighted(**params)
        elif name == "fixed":
            policy = Fixed(**params)
        elif name == "hopeful":
            policy = Hopeful(**params)
        elif name == "hybrid":
            policy = Hybrid(**params)
        elif name == "support":
            gamma = params.pop("gamma", None)
            base = Fixed(gamma) if gamma is not None else Fixed()
            policy = Support(base=base, **params)
        else:
            raise ConfigError(f"unknown policy name {name!r}")
    except TypeError as exc:
        raise ConfigError(f"bad parameters for policy {name!r}: {exc}") from None
    validate_policy(policy)
    return policy


@dataclass(frozen=True)
class LedgerConfig:
    """Target level alpha, mFDR bias eta, rejection reward omega, policy.

    ``eta`` defaults to ``1 - alpha`` and ``omega`` to ``alpha``, the
    combination under which mFDR control implies weak FWER control.
    """

    alpha: float = 0.05
    eta: float = None  # type: ignore[assignment]
    omega: float = None  # type: ignore[assignment]
    policy: PolicyConfig = field(default_factory=Fixed)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if self.eta is None:
            object.__setattr__(self, "eta", 1.0 - self.alpha)
        if self.omega is None:
            object.__setattr__(self, "omega", self.alpha)
        if not 0.0 < self.eta <= 1.0:
            raise ConfigError(f"eta must be in (0, 1], got {self.eta!r}")
        if not 0.0 < self.omega <= self.alpha:
            raise ConfigError(
                f"omega must be in (0, alpha], got omega={self.omega!r} alpha={self.alpha!r}"
            )
        validate_policy(self.policy)

    @property
    def initial_wealth(self) -> float:
        return self.eta * self.alpha

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "eta": self.eta,
            "omega": self.omega,
            "policy": policy_to_dict(self.policy),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LedgerConfig":
        policy = data.get("policy")
        return cls(
            alpha=data.get("alpha", 0.05),
            eta=data.get("eta"),
            omega=data.get("omega"),
            policy=policy_from_dict(policy) if policy is not None else Fixed(),
        )


@dataclass(frozen=True)
class LedgerState:
    """Immutable ledger snapshot after ``j`` processed hypotheses.

    ``rejection_history[i]`` is True iff hypothesis i+1 was rejected;
    ``tested_history[i]`` is False for hypotheses skipped without a test.
    ``wealth_after_reject`` is the wealth held just after the last
    rejection (the initial wealth while no rejection has occurred).
    """

    j: int
    wealth: float
    k_star: int
    rejection_history: tuple[bool, ...]
    exhausted: bool
    wealth_after_reject: float
    tested_history: tuple[bool, ...]


@dataclass(frozen=True)
class Decision:
    """A tested hypothesis: its budget and the resulting wealth."""

    rejected: bool
    budget: float
    wealth_after: float


def _is_thrifty(policy: PolicyConfig) -> bool:
    return isinstance(policy, Farsighted) and policy.beta > 0.0


def _has_skip_semantics(policy: PolicyConfig) -> bool:
    return isinstance(policy, (Hybrid, Support))


def initial_state(config: LedgerConfig) -> LedgerState:
    """Fresh ledger: j=0, wealth eta*alpha, no rejections, not exhausted."""
    return LedgerState(
        j=0,
        wealth=config.initial_wealth,
        k_star=0,
        rejection_history=(),
        exhausted=False,
        wealth_after_reject=config.initial_wealth,
        tested_history=(),
    )


def _cost(budget: float) -> float:
    return budget / (1.0 - budget)


def _fixed_budget(config: LedgerConfig, gamma: float) -> float:
    w0 = config.initial_wealth
    return w0 / (gamma + w0)


def _hopeful_budget(config: LedgerConfig, delta: float, wealth_at_reject: float) -> float:
    return min(config.alpha, wealth_at_reject / (delta + wealth_at_reject))


def _hybrid_window(state: LedgerState, window: Optional[int]) -> tuple[int, int]:
    """(rejections, size) over the last ``window`` tested hypotheses."""
    rejected = 0
    size = 0
    for was_rejected, was_tested in zip(
        reversed(state.rejection_history), reversed(state.tested_history)
    ):
        if not was_tested:
            continue
        size += 1
        rejected += was_rejected
        if window is not None and size >= window:
            break
    return rejected, size


def _raw_budget(
    state: LedgerState, config: LedgerConfig, support_fraction: Optional[float]
) -> float:
    policy = config.policy
    wealth = state.wealth
    if isinstance(policy, Farsighted):
        committed = wealth * (1.0 - policy.beta)
        return min(config.alpha, committed / (1.0 + committed))
    if isinstance(policy, Fixed):
        return _fixed_budget(config, policy.gamma)
    if isinstance(policy, Hopeful):
        return _hopeful_budget(config, policy.delta, state.wealth_after_reject)
    if isinstance(policy, Hybrid):
        rejected, size = _hybrid_window(state, policy.window)
        if rejected <= size * policy.epsilon:
            return _fixed_budget(config, policy.gamma)
        return _hopeful_budget(config, policy.delta, state.wealth_after_reject)
    if isinstance(policy, Support):
        if support_fraction is None:
            raise MissingInputError("support policy requires a support fraction")
        if not 0.0 < support_fraction <= 1.0:
            raise MissingInputError(
                f"support fraction must be in (0, 1], got {support_fraction!r}"
            )
        return _fixed_budget(config, policy.base.gamma) * support_fraction**policy.psi
    raise ConfigError(f"unknown policy {policy!r}")


def next_budget(
    state: LedgerState, config: LedgerConfig, support_fraction: Optional[float] = None
) -> float:
    """Budget the policy assigns to the next hypothesis.

    For Farsighted/Fixed/Hopeful the value is capped so its acceptance
    cost never exceeds current wealth. Hybrid and Support budgets are not
    capped: an unaffordable budget makes the stream skip the hypothesis.
    """
    if state.exhausted:
        raise ExhaustionError("ledger is exhausted; no further budget can be assigned")
    budget = _raw_budget(state, config, support_fraction)
    if not _has_skip_semantics(config.policy) and _cost(budget) > state.wealth + WEALTH_TOL:
        # b <= W / (1 + W) is exactly what keeps W - b/(1-b) >= 0. Only
        # genuinely unaffordable budgets are capped; last-ULP shortfalls
        # are covered by the accounting tolerance.
        budget = min(budget, state.wealth / (1.0 + state.wealth))
    return min(budget, 1.0 - 1e-12)


def _next_cost_if_any(state: LedgerState, config: LedgerConfig) -> Optional[float]:
    """Acceptance cost of the policy's next budget, for exhaustion checks."""
    policy = config.policy
    if isinstance(policy, Fixed):
        return _cost(_fixed_budget(config, policy.gamma))
    if isinstance(policy, Hopeful):
        return _cost(_hopeful_budget(config, policy.delta, state.wealth_after_reject))
    return None


def _settle(state: LedgerState, config: LedgerConfig) -> LedgerState:
    """Apply the wealth clamp and exhaustion rules after an update."""
    policy = config.policy
    wealth = state.wealth
    exhausted = state.exhausted
    if _is_thrifty(policy):
        # A thrifty policy never fully commits its wealth; only an exact
        # floating-point underflow to <= 0 can end it.
        if wealth <= 0.0:
            wealth = 0.0
            exhausted = True
    else:
        if wealth < WEALTH_TOL:
            wealth = 0.0
            exhausted = True
    if not exhausted:
        if _has_skip_semantics(policy):
            exhausted = wealth <= SKIP_WEALTH_FLOOR
        else:
            cost = _next_cost_if_any(replace(state, wealth=wealth), config)
            if cost is not None and wealth < cost - WEALTH_TOL:
                exhausted = True
    if wealth == state.wealth and exhausted == state.exhausted:
        return state
    return replace(state, wealth=wealth, exhausted=exhausted)


def apply_outcome(
    state: LedgerState, config: LedgerConfig, budget: float, p_value: float
) -> tuple[Decision, LedgerState]:
    """Test one hypothesis at ``budget`` and advance the ledger.

    Rejects when ``p_value <= budget`` (reward ``omega``); otherwise
    deducts ``budget / (1 - budget)``. Raises AccountingError if the
    deduction would drive wealth below -1e-12.
    """
    if state.exhausted:
        raise ExhaustionError("cannot apply an outcome to an exhausted ledger")
    if not 0.0 <= p_value <= 1.0:
        raise AccountingError(f"p-value out of [0, 1]: {p_value!r}")
    if not 0.0 < budget < 1.0:
        raise AccountingError(f"budget out of (0, 1): {budget!r}")
    j = state.j + 1
    if p_value <= budget:
        wealth = state.wealth + config.omega
        new = LedgerState(
            j=j,
            wealth=wealth,
            k_star=j,
            rejection_history=state.rejection_history + (True,),
            exhausted=False,
            wealth_after_reject=wealth,
            tested_history=state.tested_history + (True,),
        )
        decision = Decision(rejected=True, budget=budget, wealth_after=wealth)
    else:
        cost = _cost(budget)
        wealth = state.wealth - cost
        if wealth < -WEALTH_TOL:
            raise AccountingError(
                f"budget {budget!r} costs {cost!r} but wealth is {state.wealth!r}"
            )
        new = LedgerState(
            j=j,
            wealth=max(wealth, 0.0),
            k_star=state.k_star,
            rejection_history=state.rejection_history + (False,),
            exhausted=False,
            wealth_after_reject=state.wealth_after_reject,
            tested_history=state.tested_history + (True,),
        )
        decision = Decision(rejected=False, budget=budget, wealth_after=new.wealth)
    new = _settle(new, config)
    if new.wealth != decision.wealth_after:
        decision = Decision(
            rejected=decision.rejected, budget=budget, wealth_after=new.wealth
        )
    return decision, new


def _advance_untested(state: LedgerState) -> LedgerState:
    """Consume one stream position without testing (skip semantics)."""
    return replace(
        state,
        j=state.j + 1,
        rejection_history=state.rejection_history + (False,),
        tested_history=state.tested_history + (False,),
    )


def ledger_step(
    state: LedgerState,
    config: LedgerConfig,
    p_value: float,
    support_fraction: Optional[float] = None,
) -> tuple[Optional[Decision], LedgerState]:
    """Process one hypothesis; returns (decision or None if untested, state).

    Exhausted ledgers leave the state unchanged and yield None. Hybrid and
    Support skip (None) hypotheses whose budget is unaffordable while
    wealth remains above the skip floor.
    """
    if state.exhausted:
        return None, state
    budget = next_budget(state, config, support_fraction)
    if _has_skip_semantics(config.policy) and _cost(budget) > state.wealth + WEALTH_TOL:
        return None, _advance_untested(state)
    return apply_outcome(state, config, budget, p_value)


def _normalize_inputs(
    inputs: Iterable,
) -> list[tuple[float, Optional[float]]]:
    normalized = []
    for item in inputs:
        if isinstance(item, (tuple, list)):
            p, sf = item[0], item[1]
        else:
            p, sf = item, None
        normalized.append((float(p), None if sf is None else float(sf)))
    return normalized


def run_stream(
    config: LedgerConfig, inputs: Iterable
) -> list[Optional[Decision]]:
    """Fold the ledger over a stream of p-values.

    ``inputs`` is an iterable of p-values or (p_value, support_fraction)
    pairs. The output has one entry per input: a Decision, or None for
    hypotheses that were never tested (skipped or post-exhaustion).
    """
    state = initial_state(config)
    out: list[Optional[Decision]] = []
    for p, sf in _normalize_inputs(inputs):
        decision, state = ledger_step(state, config, p, sf)
        out.append(decision)
    return out
