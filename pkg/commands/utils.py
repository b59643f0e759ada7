from colorama import Back, Fore, Style

import config as conf


def print_header(title: str, details: list[tuple[str, str]] = None, width: int = 60):
    """Boxed banner for the start of a run, followed by one `key: value` line per detail."""
    if not conf.VERBOSE:
        return
    title = f" {title} "[:width]
    padding = (width - len(title)) // 2
    print(f"\n{Back.BLUE}{Fore.WHITE}┌{'─' * width}┐{Style.RESET_ALL}")
    print(
        f"{Back.BLUE}{Fore.WHITE}│{' ' * padding}{title}{' ' * (width - len(title) - padding)}│{Style.RESET_ALL}"
    )
    print(f"{Back.BLUE}{Fore.WHITE}└{'─' * width}┘{Style.RESET_ALL}")
    for key, value in details or []:
        print(f"  {Fore.YELLOW}{key}{Style.RESET_ALL}: {value}")
    print()


def seconds_to_hms(seconds: float) -> str:
    m, s = divmod(float(seconds), 60)
    h, m = divmod(int(m), 60)
    return f"{h:d}:{m:02d}:{s:05.2f}"
