from .command import *
from .lab_commands import COMMANDS, CommandResult
from .utils import *

CommandExecuter.register_commands(COMMANDS)
