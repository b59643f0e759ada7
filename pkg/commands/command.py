"""
Registry that turns lab experiments into command-line subcommands

Example:
    ```py
    @cmd(["tail"], "Least singular value tail curve")
    def tail_command(n: int = 100, delta: float = 0.5, *, master_seed: int = 0, jobs: int = None):
        ""\"
        Args:
            n: Matrix dimension
            delta: Sparsity exponent
        ""\"
        ...

    CommandExecuter.register_commands([tail_command])
    params = CommandExecuter.parse("tail", ["--n", "50"])
    result = CommandExecuter.execute("tail", params, master_seed=42)
    ```

Positional-or-keyword parameters become flags; keyword-only parameters are
supplied by the caller (seed, worker cap) and never appear on the command line.
"""

from typing import Any, Callable, Dict

from thefuzz import process

from func_to_args import function_to_parser


class InvalidCommand(Exception):
    pass


class CommandNotFound(Exception):
    def __init__(self, name: str, suggestion: str | None = None):
        hint = f" (did you mean '{suggestion}'?)" if suggestion else ""
        super().__init__(f"Command not found: {name}{hint}")
        self.name = name
        self.suggestion = suggestion


def cmd(aliases: list[str], help_msg: str = "", flags: dict[str, str] = None):
    """
    Marks a function as a subcommand.

    Args:
        aliases: Names the subcommand answers to; the first one is used in run directories.
        help_msg: One-line summary listed by --help.
        flags: Extra flag names for parameters whose name cannot be spelled in Python (lam -> lambda).

    Raises:
        TypeError: If aliases is not a list.
        ValueError: If aliases is empty.
    """
    if not isinstance(aliases, list):
        raise TypeError("aliases must be a list")
    if not aliases:
        raise ValueError("aliases must not be empty")

    def mark(func):
        func.aliases = aliases
        func.help = help_msg
        func.flags = dict(flags or {})
        return func
    return mark


class CommandExecuter:
    """Static registry of subcommands keyed by alias."""

    __commands: Dict[str, Callable] = {}

    @staticmethod
    def register_commands(commands: list[Callable]) -> None:
        """
        Raises:
            InvalidCommand: If a function was never decorated, or an alias already
                belongs to another function.
        """
        for func in commands:
            aliases = getattr(func, "aliases", None)
            if not aliases:
                raise InvalidCommand(f"Command {func.__name__} must have at least one alias")
            for alias in aliases:
                owner = CommandExecuter.__commands.setdefault(alias, func)
                if owner is not func:
                    raise InvalidCommand(f"Alias '{alias}' for command '{func.__name__}' already registered.")

    @staticmethod
    def get_commands() -> Dict[str, Callable]:
        return CommandExecuter.__commands

    @staticmethod
    def get_command_names() -> list[str]:
        return list(CommandExecuter.__commands)

    @staticmethod
    def suggest(name: str, min_score: int = 60) -> str | None:
        """Closest registered alias to `name`, or None when nothing is close."""
        names = CommandExecuter.get_command_names()
        match = process.extractOne(name, names) if names else None
        return match[0] if match and match[1] >= min_score else None

    @staticmethod
    def get(command_name: str) -> Callable:
        """
        Raises:
            InvalidCommand: If the name is empty.
            CommandNotFound: If no command has this alias.
        """
        if not command_name:
            raise InvalidCommand("Invalid command: empty command name")
        try:
            return CommandExecuter.__commands[command_name]
        except KeyError:
            raise CommandNotFound(command_name, CommandExecuter.suggest(command_name)) from None

    @staticmethod
    def parser(command_name: str):
        func = CommandExecuter.get(command_name)
        return function_to_parser(func, prog=command_name, description=func.help,
                                  flags=getattr(func, "flags", None))

    @staticmethod
    def parse(command_name: str, args: list[str]) -> dict[str, Any]:
        """Parses command-line arguments into the command's parameters, defaults filled in."""
        return vars(CommandExecuter.parser(command_name).parse_args(args))

    @staticmethod
    def execute(command_name: str, params: dict[str, Any], **context) -> Any:
        """
        Runs a command with parsed parameters.

        Args:
            command_name: Alias of the command.
            params: Values for the command's flags.
            context: Keyword-only values such as master_seed and jobs.
        """
        return CommandExecuter.get(command_name)(**params, **context)

    @staticmethod
    def help(command_name: str) -> str | None:
        """Summary line followed by the docstring, or None for an unknown alias."""
        func = CommandExecuter.__commands.get(command_name)
        if func is None:
            return None
        return f"{getattr(func, 'help', '')}  {(func.__doc__ or '').strip()}"
