"""
This package turns a Python function into an argparse parser.

It leverages type hints, docstrings, and function signatures so that a
subcommand's flags, their types, defaults and help lines come from the
function itself. Keyword-only parameters are left out: they are filled in by
the caller, not by the user.
"""

import argparse
import inspect
import re
from types import UnionType
from typing import Any, Callable, Dict, Literal, Union, get_args, get_origin, get_type_hints

import docstring_parser


class ArgsError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """An ArgumentParser that raises ArgsError instead of exiting on bad input."""

    def error(self, message):
        raise ArgsError(f"{self.prog}: {message}")


def flag_name(param_name: str) -> str:
    return "--" + param_name.replace("_", "-")


def function_to_parser(func: Callable, prog: str = None, description: str = None,
                       flags: Dict[str, str] = None) -> ArgumentParser:
    """
    Builds a parser whose flags are the function's positional-or-keyword parameters.

    Args:
        func: The function to convert.
        prog: Program name shown in usage lines.
        description: Overrides the docstring description.
        flags: Extra flag names per parameter, without the leading dashes.

    Returns:
        An ArgumentParser; parsing yields a namespace keyed by parameter name.
    """
    signature = inspect.signature(func)
    docstring = docstring_parser.parse(func.__doc__ or "")
    type_hints = get_type_hints(func)
    flags = flags or {}

    doc_str_desc = description or docstring.description or ""
    doc_str_desc = re.sub(r'\s+', ' ', doc_str_desc).strip()

    parser = ArgumentParser(prog=prog or func.__name__, description=doc_str_desc, allow_abbrev=False)

    for param_name, param in signature.parameters.items():
        if param.kind not in (inspect.Parameter.POSITIONAL_OR_KEYWORD, inspect.Parameter.POSITIONAL_ONLY):
            continue

        param_info = {}
        if param_name in type_hints:
            param_info.update(type_hint_to_argument(type_hints[param_name]))

        docstring_param = next((p for p in docstring.params if p.arg_name == param_name), None)
        if docstring_param and docstring_param.description:
            param_info["help"] = re.sub(r'\s+', ' ', docstring_param.description).strip()

        if param.default == inspect.Parameter.empty:
            param_info["required"] = True
        else:
            param_info["default"] = param.default

        names = [flag_name(param_name)]
        if param_name in flags:
            names.append(flag_name(flags[param_name]))
        parser.add_argument(*names, dest=param_name, **param_info)

    return parser


def type_hint_to_argument(type_hint) -> Dict[str, Any]:
    """
    Converts a Python type hint to add_argument keywords. Handles:
        - Basic types (str, int, float)
        - typing.Optional[T] / T | None -> T
        - typing.Literal[...]           -> choices
        - list[T]                       -> one or more T values

    Args:
        type_hint: The Python type hint.

    Returns:
        A dictionary of add_argument keywords.

    Raises:
        TypeError: If the hint has no command-line form.
    """
    if type_hint in (str, int, float):
        return {"type": type_hint}
    elif get_origin(type_hint) is Literal:
        choices = list(get_args(type_hint))
        return {"type": type(choices[0]), "choices": choices}
    elif get_origin(type_hint) is list:
        args = get_args(type_hint)
        info = {"nargs": "+"}
        if args:
            info.update(type_hint_to_argument(args[0]))
        return info
    elif get_origin(type_hint) in (Union, UnionType):
        # handle Optional[T] (which is Union[T, None])
        non_none_args = [arg for arg in get_args(type_hint) if arg is not type(None)]
        if len(non_none_args) == 1:
            return type_hint_to_argument(non_none_args[0])

    raise TypeError(f"Unsupported type hint for a command-line flag: {type_hint}")
