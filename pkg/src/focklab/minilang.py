"""Helpers shared by the weight, function and measure mini-languages."""

from __future__ import annotations

from .errors import UsageError


def split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside of parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise UsageError(f"unbalanced parentheses in {text!r}")
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise UsageError(f"unbalanced parentheses in {text!r}")
    out.append("".join(cur))
    return [s.strip() for s in out]


def strip_parens(text: str) -> str:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        return text[1:-1].strip()
    raise UsageError(f"expected a parenthesised list, got {text!r}")


def parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "")
    if not s:
        raise UsageError("empty complex literal")
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise UsageError(f"bad complex literal {text!r}") from None


def parse_real(text: str, name: str = "value") -> float:
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise UsageError(f"bad real number for {name}: {text!r}") from None
    return v


def head_args(text: str) -> tuple[str, str]:
    """``name:args`` -> (name, args); ``name`` -> (name, '')."""
    text = text.strip()
    if ":" in text:
        name, rest = text.split(":", 1)
        return name.strip(), rest.strip()
    return text, ""


def parse_kv(text: str, allowed: dict) -> dict:
    """Parse ``k=v,k=v`` where ``allowed`` maps key -> converter.

    Values containing commas must be parenthesised.
    """
    out = {}
    if not text:
        return out
    for tok in split_top(text, ","):
        if not tok:
            continue
        if "=" not in tok:
            raise UsageError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        k = k.strip()
        if k not in allowed:
            raise UsageError(f"unknown parameter {k!r}; expected one of {sorted(allowed)}")
        out[k] = allowed[k](v.strip())
    return out


def fmt_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:g}{z.imag:+g}i"
