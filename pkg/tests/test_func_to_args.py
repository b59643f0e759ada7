from typing import Literal, Optional

import pytest

from func_to_args import ArgsError, flag_name, function_to_parser, type_hint_to_argument


def sample_function(n: int, delta: float = 0.5, field: Literal["complex", "real"] = "complex",
                    grid: list[float] = None, label: Optional[str] = None, *, master_seed: int = 0):
    """
    A sample function for flag generation.

    Args:
        n: Matrix dimension
        delta: Sparsity exponent
        field: Scalar field
        grid: Thresholds to scan
        label: Free-form tag
        master_seed: Supplied by the caller
    """


def test_flag_name():
    assert flag_name("eps_min") == "--eps-min"
    assert flag_name("n") == "--n"


def test_type_hints():
    assert type_hint_to_argument(int) == {"type": int}
    assert type_hint_to_argument(Optional[float]) == {"type": float}
    assert type_hint_to_argument(float | None) == {"type": float}
    assert type_hint_to_argument(list[int]) == {"nargs": "+", "type": int}
    assert type_hint_to_argument(Literal["a", "b"]) == {"type": str, "choices": ["a", "b"]}
    with pytest.raises(TypeError):
        type_hint_to_argument(dict[str, int])


def test_parser_defaults_and_types():
    parser = function_to_parser(sample_function)
    args = vars(parser.parse_args(["--n", "12", "--grid", "0.1", "0.2"]))
    assert args == {"n": 12, "delta": 0.5, "field": "complex", "grid": [0.1, 0.2], "label": None}


def test_keyword_only_parameters_are_skipped():
    parser = function_to_parser(sample_function)
    with pytest.raises(ArgsError):
        parser.parse_args(["--n", "3", "--master-seed", "1"])


def test_required_and_choices():
    parser = function_to_parser(sample_function, prog="sample")
    with pytest.raises(ArgsError) as e:
        parser.parse_args([])
    assert str(e.value).startswith("sample: ")
    with pytest.raises(ArgsError):
        parser.parse_args(["--n", "3", "--field", "octonion"])


def test_help_comes_from_docstring():
    parser = function_to_parser(sample_function)
    text = parser.format_help()
    assert "A sample function for flag generation." in text
    assert "Sparsity exponent" in text
    assert "Supplied by the caller" not in text


def test_extra_flag_names():
    def shift(lam: float = 0.1):
        return lam

    parser = function_to_parser(shift, flags={"lam": "lambda"})
    assert vars(parser.parse_args(["--lambda", "0.3"])) == {"lam": 0.3}
    assert vars(parser.parse_args(["--lam", "0.4"])) == {"lam": 0.4}
