# stage_tools/config_tool.py
"""
Run configuration: defaults, then ESG_* environment variables (a `.env` file is
loaded first), then a JSON or TOML config file, then explicit command-line flags.
"""

import json
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from stage_tools.errors import ConfigurationError
from stages.SelectStage.baseclass import SeedIris

ENV_PREFIX = "ESG_"
# environment variable suffix -> RunConfig field
ENV_FIELDS = {
    "STORAGE": "storage",
    "SPILL_THRESHOLD": "spill_threshold",
    "OUTPUT_DIR": "output_dir",
    "LOG_LEVEL": "verbose",
}


class ConfigFactory:
    """
    Factory for loading run configuration files.
    """

    def read_toml_file(self, file_path):
        with open(file_path, "rb") as f:
            try:
                return tomllib.load(f)
            except tomllib.TOMLDecodeError as e:
                raise ConfigurationError(f"{file_path}: invalid TOML: {e}") from None

    def read_json_file(self, file_path):
        with open(file_path, "r", encoding="utf-8") as f:
            try:
                return json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"{file_path}: invalid JSON at line {e.lineno}: {e.msg}") from None

    def load(self, file_path) -> Dict[str, Any]:
        """
        Reads a config file based on its extension.
        Supports '.json' and '.toml' files.
        """
        if not file_path or str(file_path).strip() == "":
            raise ConfigurationError("config file name is empty")
        if not os.path.exists(file_path):
            raise ConfigurationError(f"File not found: {file_path}")

        _, extension = os.path.splitext(str(file_path))
        extension = extension.lower()
        try:
            if extension == ".toml":
                data = self.read_toml_file(file_path)
            elif extension == ".json":
                data = self.read_json_file(file_path)
            else:
                raise ConfigurationError(f"Unsupported config file type: {extension}")
        except OSError as e:
            raise ConfigurationError(f"cannot read {file_path}: {e.strerror}") from None
        if not isinstance(data, dict):
            raise ConfigurationError(f"{file_path}: the config must be a table/object")
        return data


def environment_values(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """RunConfig values taken from ESG_* variables."""
    if environ is None:
        load_dotenv(find_dotenv(usecwd=True))
        environ = os.environ
    values: Dict[str, Any] = {}
    for suffix, name in ENV_FIELDS.items():
        raw = environ.get(ENV_PREFIX + suffix)
        if raw is None or raw == "":
            continue
        if name == "verbose":
            values[name] = raw.strip().upper() == "DEBUG"
        else:
            values[name] = raw
    return values


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    inputs: List[Path] = Field(default_factory=list, description="N-Triples files, optionally gzipped.")
    mode: Literal["classes", "properties", "both"] = Field("both", description="Which ESG(s) to build.")
    seeds: SeedIris = Field(default_factory=SeedIris, description="Ground IRIs of the run.")
    denylist_additions: List[Tuple[str, str, str]] = Field(default_factory=list, description="Extra ground triples to drop.")
    denylist_files: List[Path] = Field(default_factory=list, description="Extra denylist files (.nt or .json).")
    output_dir: Path = Field(Path("out"), description="Directory the exports are written to.")
    storage: Literal["memory", "disk"] = Field("memory", description="Key-value backend of the ESG maps.")
    shared_bnode_scope: bool = Field(False, description="Keep blank-node labels global across input files.")
    property_esg: Optional[Path] = Field(None, description="Prior properties export reused by a classes run.")
    es0_reading: Literal["ies", "des"] = Field("ies", description="Extension used for the *_0 set counts.")
    spill_threshold: Optional[int] = Field(None, ge=0, description="Terms kept in memory before the dictionary spills.")
    prefixes: Dict[str, str] = Field(default_factory=dict, description="CURIE prefix -> namespace IRI.")
    verbose: bool = Field(False, description="DEBUG logging.")

    @field_validator("denylist_additions", mode="before")
    @classmethod
    def _triples(cls, value):
        if isinstance(value, list):
            return [tuple(t) if isinstance(t, (list, tuple)) else t for t in value]
        return value

    @classmethod
    def resolve(
        cls,
        file_values: Optional[Mapping[str, Any]] = None,
        flag_values: Optional[Mapping[str, Any]] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> "RunConfig":
        """Merge the layers (later wins; None flags are ignored) and validate."""
        merged: Dict[str, Any] = dict(environment_values(environ))
        for layer in (file_values or {}, {k: v for k, v in (flag_values or {}).items() if v is not None}):
            for key, value in layer.items():
                if key == "seeds" and isinstance(value, Mapping):
                    merged["seeds"] = {**merged.get("seeds", {}), **value}
                elif key == "prefixes" and isinstance(value, Mapping):
                    merged["prefixes"] = {**merged.get("prefixes", {}), **value}
                else:
                    merged[key] = value
        try:
            config = cls.model_validate(merged)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(x) for x in first["loc"])
            raise ConfigurationError(f"invalid configuration at {where}: {first['msg']}") from None
        if config.mode == "classes" and config.property_esg is None:
            raise ConfigurationError("mode=classes needs --property-esg (a prior properties export) or mode=both")
        return config


if __name__ == "__main__":
    print(RunConfig.resolve().model_dump_json(indent=2))
