import configparser
import csv
import json
import os
from typing import Any, Dict, List, Optional, Sequence

from cloneflip.constants import CONFIG_SECTION
from cloneflip.errors import ConfigError


def parse_key_values(text: str, path: Optional[str] = None) -> Dict[str, str]:
    """
    Parse `key = value` lines; `#` starts a comment.
    """
    parser = configparser.ConfigParser(
        comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    try:
        parser.read_string("[{}]\n{}".format(CONFIG_SECTION, text))
    except configparser.Error as error:
        raise ConfigError(path, str(error).splitlines()[0])
    return dict(parser.items(CONFIG_SECTION))


def read_key_value_file(path: str) -> Dict[str, str]:
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as error:
        raise ConfigError(path, error.strerror or str(error))
    return parse_key_values(text, path)


def format_key_values(params: Dict[str, Any]) -> str:
    entries = params.items()
    return "".join(
        "{key} = {value}\n".format(key=key, value=value)
        for key, value in entries
        if value is not None
    )


def output_path(out_dir: str, file_name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, file_name)


def write_csv(path: str, columns: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, "r", newline="") as f:
        return list(csv.DictReader(f))


def write_json(path: str, payload: Any) -> str:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path
