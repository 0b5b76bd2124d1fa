try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from src.domain.exceptions import ConfigFileError, ConfigValidationError

ModelT = TypeVar("ModelT", bound=BaseModel)


def read_toml(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigFileError(str(path), e) from e


def validate_config(data: dict[str, Any], model: type[ModelT], source: str) -> ModelT:
    """Validate `data` into `model`; failures name every offending key."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        keys = [".".join(str(part) for part in err["loc"]) for err in e.errors()]
        details = "; ".join(f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors())
        raise ConfigValidationError(source, keys, details) from e


def load_config(
    path: str | Path,
    model: type[ModelT],
    overrides: dict[str, Any] | None = None,
    defaults: dict[str, Any] | None = None,
) -> ModelT:
    """`defaults`, then TOML file values, then non-None `overrides` on top."""
    data = {**(defaults or {}), **read_toml(path)}
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return validate_config(data, model, str(path))
