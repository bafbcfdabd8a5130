"""Declarative experiment configuration (YAML).

Recognised top-level fields: ``seed``, ``data``, ``models`` (each with
``family``, ``prior`` and optional ``pseudo_prior``), ``prior_prob``,
``truth``, ``n_grid``, ``replications``, ``draws``, ``pass_threshold``,
``null_value``, ``model`` and ``cases``. ``Config.to_text`` re-emits a
canonical document, so loading and dumping again is idempotent.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .asymptotics import AsymptoticScenario, EmbeddedPair
from .joint import ModelPairConfig
from .models import DataSet, Distribution, Family, ModelSpec, PriorSpec

_FIELD_ORDER = (
    "seed", "data", "prior_prob", "models", "truth", "n_grid", "replications",
    "draws", "pass_threshold", "null_value", "model", "cases",
)
_KNOWN = set(_FIELD_ORDER)


class ConfigError(ValueError):
    pass


def shipped_config(name: str) -> Path:
    """Path of a configuration file bundled with the package (``fig2``, ``embedded``, ...)."""
    path = resources.files("modelchoice").joinpath("configs", f"{name}.yaml")
    return Path(str(path))


def _float_list(values, what):
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigError(f"{what} must be a nonempty list")
    return [float(v) for v in values]


def parse_family(d: dict) -> Family:
    name = d.get("family")
    if name == "binomial":
        return Family.binomial(int(d["trials"]))
    if name == "gaussian":
        return Family.gaussian(float(d["variance"]))
    if name == "poisson":
        return Family.poisson()
    raise ConfigError(f"unknown family {name!r}")


def family_to_dict(family: Family) -> dict:
    out = {"family": family.name}
    if family.trials is not None:
        out["trials"] = family.trials
    if family.variance is not None:
        out["variance"] = family.variance
    return out


def parse_model(d: dict) -> tuple[ModelSpec, PriorSpec | None]:
    if "prior" not in d:
        raise ConfigError("model entry needs a prior")
    try:
        prior = PriorSpec.from_dict(d["prior"])
        model = ModelSpec(parse_family(d), prior, d.get("name"))
        pseudo = PriorSpec.from_dict(d["pseudo_prior"]) if d.get("pseudo_prior") else None
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed model entry: {exc}") from exc
    return model, pseudo


def model_to_dict(model: ModelSpec, pseudo: PriorSpec | None = None) -> dict:
    out = {}
    if model.name:
        out["name"] = model.name
    out.update(family_to_dict(model.family))
    out["prior"] = model.prior.to_dict()
    if pseudo is not None:
        out["pseudo_prior"] = pseudo.to_dict()
    return out


_TRUTH_PARAMS = {"poisson": "rate", "binomial": "p", "gaussian": "mean"}


def parse_truth(d: dict) -> Distribution:
    fam = d.get("family")
    if fam not in _TRUTH_PARAMS:
        raise ConfigError(f"unknown truth family {fam!r}")
    return Distribution(
        fam,
        float(d[_TRUTH_PARAMS[fam]]),
        trials=int(d["trials"]) if fam == "binomial" else None,
        variance=float(d["variance"]) if fam == "gaussian" else None,
    )


def truth_to_dict(t: Distribution) -> dict:
    out = {"family": t.family, _TRUTH_PARAMS[t.family]: t.param}
    if t.trials is not None:
        out["trials"] = t.trials
    if t.variance is not None:
        out["variance"] = t.variance
    return out


@dataclass
class Config:
    raw: dict

    @classmethod
    def from_text(cls, text: str) -> "Config":
        try:
            raw = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a mapping")
        unknown = set(raw) - _KNOWN
        if unknown:
            raise ConfigError(f"unknown fields: {sorted(unknown)}")
        cfg = cls(raw)
        cfg.raw = cfg._canonical()
        return cfg

    @classmethod
    def load(cls, path) -> "Config":
        return cls.from_text(Path(path).read_text())

    def _canonical(self) -> dict:
        r = self.raw
        out = {}
        if "seed" in r:
            out["seed"] = int(r["seed"])
        if "data" in r:
            out["data"] = [float(x) for x in (r["data"] or [])]
        if "prior_prob" in r:
            out["prior_prob"] = _float_list(r["prior_prob"], "prior_prob")
        if "models" in r:
            out["models"] = [model_to_dict(*parse_model(m)) for m in r["models"]]
        if "truth" in r:
            out["truth"] = truth_to_dict(parse_truth(r["truth"]))
        if "n_grid" in r:
            out["n_grid"] = [int(n) for n in (r["n_grid"] or [])]
        for key in ("replications", "draws"):
            if key in r:
                out[key] = int(r[key])
        for key in ("pass_threshold", "null_value"):
            if key in r:
                out[key] = float(r[key])
        if "model" in r:
            out["model"] = model_to_dict(*parse_model(r["model"]))
        if "cases" in r:
            cases = []
            for c in r["cases"]:
                if "data" in c:
                    cases.append({"data": [float(x) for x in c["data"]]})
                else:
                    cases.append({"n": int(c["n"]), "xbar": float(c["xbar"])})
            out["cases"] = cases
        return {k: out[k] for k in _FIELD_ORDER if k in out}

    def to_text(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=False, default_flow_style=None)

    # typed views ------------------------------------------------------------

    @property
    def seed(self) -> int:
        return self.raw.get("seed", 42)

    def dataset(self) -> DataSet:
        if "data" not in self.raw:
            raise ConfigError("config has no data")
        return DataSet(tuple(self.raw["data"]))

    def pair(self) -> ModelPairConfig:
        models = self.raw.get("models")
        if not models or len(models) != 2:
            raise ConfigError("exactly two models are required")
        (m1, ps1), (m2, ps2) = (parse_model(m) for m in models)
        probs = self.raw.get("prior_prob", [0.5, 0.5])
        if len(probs) != 2 or abs(sum(probs) - 1.0) > 1e-12:
            raise ConfigError("prior_prob must be two probabilities summing to 1")
        return ModelPairConfig(m1, m2, probs[0], ps1, ps2)

    def scenario(self, seed: int | None = None, draws: int | None = None) -> AsymptoticScenario:
        r = self.raw
        if "truth" not in r:
            raise ConfigError("consistency config needs a truth")
        if not r.get("n_grid"):
            raise ConfigError("n_grid is empty")
        try:
            return AsymptoticScenario(
                parse_truth(r["truth"]),
                self.pair(),
                tuple(r["n_grid"]),
                r.get("replications", 1),
                self.seed if seed is None else seed,
                draws=draws or r.get("draws", 4000),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def embedded_cases(self) -> list[tuple[EmbeddedPair, DataSet, dict]]:
        r = self.raw
        if "model" not in r or not r.get("cases"):
            raise ConfigError("embedded config needs a model and cases")
        model, _ = parse_model(r["model"])
        pair = EmbeddedPair(model, r.get("null_value", 0.0))
        out = []
        for c in r["cases"]:
            if "data" in c:
                data = DataSet(tuple(c["data"]))
                meta = {"n": data.n, "xbar": sum(data.observations) / data.n}
            else:
                data = DataSet((c["xbar"],) * c["n"])
                meta = dict(c)
            out.append((pair, data, meta))
        return out
