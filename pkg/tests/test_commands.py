import pytest

from commands import CommandExecuter, CommandNotFound, InvalidCommand, cmd
from func_to_args import ArgsError


def test_cmd_decorator():
    @cmd(["sample"], "Sample command")
    def sample_command():
        return "sample success"

    assert hasattr(sample_command, 'aliases')
    assert sample_command.aliases == ["sample"]
    assert sample_command.help == "Sample command"
    assert sample_command.flags == {}


def test_cmd_decorator_invalid_aliases():
    with pytest.raises(TypeError):
        @cmd("not_a_list")
        def invalid_command():
            pass


def test_cmd_decorator_empty_aliases():
    with pytest.raises(ValueError):
        @cmd([])
        def empty_command():
            pass


def test_command_execution():
    @cmd(["scale-demo"], "Scales a number")
    def scale(x: float = 1.0, factor: int = 2, *, master_seed: int = 0, jobs: int = None):
        return x * factor + master_seed

    CommandExecuter.register_commands([scale])

    params = CommandExecuter.parse("scale-demo", ["--x", "1.5"])
    assert params == {"x": 1.5, "factor": 2}
    assert CommandExecuter.execute("scale-demo", params, master_seed=1, jobs=None) == 4.0


def test_registering_same_command_twice_is_allowed():
    @cmd(["twice-demo"])
    def twice():
        return None

    CommandExecuter.register_commands([twice])
    CommandExecuter.register_commands([twice])
    assert CommandExecuter.get("twice-demo") is twice


def test_alias_collision():
    @cmd(["tail"])
    def impostor():
        return None

    with pytest.raises(InvalidCommand):
        CommandExecuter.register_commands([impostor])


def test_command_help():
    @cmd(["echo-demo"], "Echoes input")
    def echo(text: str = ""):
        """
        Repeats the input text back.

        Args:
            text: The text to echo
        """
        return text

    CommandExecuter.register_commands([echo])

    help_text = CommandExecuter.help("echo-demo")
    assert "Echoes input" in help_text
    assert "Repeats the input text back." in help_text
    assert CommandExecuter.help("missing-demo") is None


def test_invalid_command():
    with pytest.raises(InvalidCommand):
        CommandExecuter.get("")


def test_command_not_found_suggests_alias():
    with pytest.raises(CommandNotFound) as e:
        CommandExecuter.get("tial")
    assert e.value.suggestion == "tail"
    assert "did you mean 'tail'" in str(e.value)


def test_lab_commands_are_registered():
    names = CommandExecuter.get_command_names()
    for name in ["tail", "norm", "rowbound", "net-check", "constants", "schedule", "incompressible",
                 "distance", "shift"]:
        assert name in names


def test_shift_accepts_lambda_flag():
    params = CommandExecuter.parse("shift", ["--lambda", "0.25", "--n", "20"])
    assert params["lam"] == 0.25
    assert params["n"] == 20


def test_field_choices_are_enforced():
    with pytest.raises(ArgsError):
        CommandExecuter.parse("tail", ["--field", "quaternion"])


def test_lab_commands_name_distinct_topics():
    commands = CommandExecuter.get_commands()
    names = ["tail", "norm", "rowbound", "net-check", "constants", "schedule", "incompressible",
             "distance", "shift"]
    helps = [commands[name].help for name in names]
    assert all(text.strip() for text in helps)
    assert len(set(helps)) == len(names)
