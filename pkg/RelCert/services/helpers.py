import json
from fractions import Fraction
from pathlib import Path
from typing import Dict, Union
import secrets
import string

def load_json(file_path: Union[str, Path]) -> Dict:
    if not isinstance(file_path, Path):
        file_path = Path(file_path)

    with open(file_path, 'r', encoding='utf-8') as f:
        return json.load(f)

def save_json(data_to_write, file_path: Union[str, Path]):
    # sort_keys keeps artifacts byte-identical across runs
    with open(file_path, 'w', encoding='utf-8') as json_file:
        json.dump(data_to_write, json_file, indent=4, sort_keys=True)
        json_file.write("\n")

def dumps_json(data) -> str:
    return json.dumps(data, indent=4, sort_keys=True) + "\n"

def fraction_to_str(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"

def str_to_fraction(text: str) -> Fraction:
    """Parse "p/q" (or a bare integer). Decimal strings are refused so that every
    stored number stays an exact rational."""
    if not isinstance(text, str):
        raise ValueError(f"Expected a rational string 'p/q', got {text!r}")
    stripped = text.strip()
    if "." in stripped or "e" in stripped.lower():
        raise ValueError(f"Expected a rational string 'p/q', got {text!r}")
    try:
        return Fraction(stripped)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"Expected a rational string 'p/q', got {text!r}")

def parse_rational(value) -> Fraction:
    """Accept ints, Fractions, 'p/q' strings and decimal strings/floats given by a user
    (a decimal like 0.6 becomes exactly 3/5)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"Cannot read {value!r} as a rational number")

def generate_random_string(length = 10):
    characters = string.ascii_letters
    return "".join(secrets.choice(characters) for _ in range(length))
