"""
Console lines for running experiments.

An experiment announces itself once with its parameters and then reports
results underneath:

    [EXPERIMENT] Tail curve [n=100] [delta=0.5] [trials=10000]
      ├─ Fitted exponent: 1.98 (r2=0.997)
"""

import colorama
from colorama import Fore, Style

import config as conf

colorama.init(autoreset=True)

TAG = "[EXPERIMENT]"
BRANCH = "  ├─"


def _tagged_pairs(pairs) -> str:
    return " ".join(f"[{Fore.YELLOW}{name}{Fore.WHITE}={value}]" for name, value in pairs)


def experiment_message_print(title: str, params: list[tuple[str, object]] = None):
    """
    Announces an experiment.

    Args:
        title: Name of the experiment.
        params: (name, value) pairs shown after the title.
    """
    if not conf.VERBOSE:
        return
    line = f"{Fore.CYAN}{TAG}{Style.RESET_ALL} {Fore.WHITE}{title}"
    if params:
        line += " " + _tagged_pairs(params)
    print(line)


def experiment_report_print(label: str, value, is_error: bool = False):
    """One result line under the current experiment. Errors print even when quiet."""
    if not (conf.VERBOSE or is_error):
        return
    color = Fore.RED if is_error else Fore.YELLOW
    print(f"{Fore.CYAN}{BRANCH}{Style.RESET_ALL} {label} {color}{value}")


def format_float(value: float, digits: int = 6) -> str:
    return f"{value:.{digits}g}"
