# -*- coding: utf-8 -*-
import re
import sys
import logging
import argparse
import configparser
import collections

from . import __version__
from .util import kebab
from .util.matcher import suggestion

logger = logging.getLogger(__name__)

COMMANDS = ("tradeoff", "capacity", "flowgraph", "construct", "repair",
            "psr", "optimize", "sweep")


class Configuration(object):
    """The Configuration class makes objects that get user input via a
    command line interface and store the user input for easy access.

    Typical usage is as follows:

    .. code:: python

        from lossyrepair.cli import Configuration

        conf = Configuration(
            "Regenerating code tool", commands=["psr"]
        ).add("beta", desc="Packets each helper delivers", default="2"
        ).ask_user(argv=["psr", "--beta", "3"])

        conf.command # "psr"
        conf.beta # "3"

    Values given in the ``--config`` file become defaults that the
    command line still overrides.

    :keyword description: Set the description shown to the user when
      the help flag is given
    :type description: str

    :keyword version: Set the version shown to the user when the
      version flag is given
    :type version: str

    :keyword defaults: Add the default options (output, config, jobs,
      seed, format and logging).
    :type defaults: bool

    :keyword commands: The choices of the positional ``command``
      argument. No positional argument is added when None.
    :type commands: list of str

    """

    def __init__(self, description=None, version=None, defaults=True,
                 remove_options=None, prompt_user=True, commands=None):
        self.description = description or "lossyrepair"
        self.version = version
        self.commands = commands
        self.prompt_user = prompt_user

        self._arguments = collections.OrderedDict()
        self._user_arguments = collections.OrderedDict()

        # -h is taken by help
        self._shorts = set('h')
        self._user_asked = False

        self.parser = argparse.ArgumentParser(
            description=self.description,
            formatter_class=argparse.RawTextHelpFormatter,
            allow_abbrev=False)

        if defaults:
            self._arguments = collections.OrderedDict(self.get_default_options())
            for opt, info in self.get_default_options():
                if info.short:
                    self._shorts.add(info.short.lstrip("-"))

        if remove_options:
            for option in remove_options:
                self.remove(option)

        if self.commands:
            self.parser.add_argument("command", choices=list(self.commands),
                                     help="The computation to run")

        if self.version:
            self.parser.add_argument("--version", action="version",
                                     version="%(prog)s v" + self.version)

    @staticmethod
    class Argument(object):
        def __init__(self, short, long, default=None, type=None, action=None,
                     choices=None, help=None, dest=None, required=None):
            self.short = short
            self.long = long
            keywords = {"default": default, "type": type, "action": action, "choices": choices,
                        "help": help, "dest": dest, "required": required}
            self.keywords = dict((key, value) for key, value in keywords.items()
                                 if value is not None)

    @classmethod
    def get_default_options(cls):
        return [
            ("output", cls.Argument("-o", "--output",
                help="Write results to this file \n[default: standard output]")),
            ("config", cls.Argument(None, "--config",
                help="Read option defaults from this INI file \n[default: only use command line options]")),
            ("jobs", cls.Argument("-j", "--jobs", default=1, type=int,
                help="Number of jobs to execute in parallel \n[default: %(default)s]")),
            ("seed", cls.Argument(None, "--seed", type=int,
                help="Seed of every random draw \n[default: pick one and print it]")),
            ("format", cls.Argument(None, "--format", default="csv", choices=["csv", "json"],
                help="Format of the results \n[default: %(default)s]")),
            ("log_level", cls.Argument(None, "--log-level", default="WARNING",
                choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                help="Set the level of output for the log \n[default: %(default)s]")),
            ("log", cls.Argument(None, "--log",
                help="Write the log to this file \n[default: standard error]")),
        ]

    def add(self, name, desc=None, type=None, default=None, short=None,
            action=None, choices=None, required=None):
        """Add an option to the Configuration object.

        :param name: Set the name of the option. This name is
          transformed with :func:`lossyrepair.util.kebab` to the long
          option flag in the command line interface e.g. ``alpha_prime
          -> --alpha-prime``.
        :type name: str

        :keyword desc: Set the description of the option shown by
          ``--help``.
        :type desc: str

        :keyword type: Argparse type

        :keyword default: Set a default for the option. This value is
          stored if the user doesn't set the flag for this option.

        :keyword short: Set the short flag for this option.
        :type short: str

        :keyword action: Set an action to execute with flag
        :type action: function or string

        :keyword required: Add this to the set of required options.

        :returns: self (the current Configuration object)

        """
        name = kebab(name)
        option = re.sub(r'-', '_', name)

        if short:
            short = "-" + short.lstrip("-")
            self._shorts.add(short.lstrip("-"))

        if desc and default is not None:
            desc = desc + "\n[default: %(default)s]"

        self._user_arguments[option] = self.Argument(short, "--" + name, default, type, action,
                                                     choices, help=desc, required=required)
        return self

    def remove(self, name):
        """Remove an option from the Configuration object.

        :param name: The name of the option to remove
        """
        try:
            self._shorts.remove(self._arguments[name].short.lstrip("-"))
        except (KeyError, AttributeError):
            pass
        del self._arguments[name]

    def get(self, name, default=None):
        """Get a stored option value from the Configuration object.

        :param name: The name of the value to get
        """
        if not self._user_asked:
            self.ask_user()
        return getattr(self, name, default)

    @property
    def option_names(self):
        return list(self._user_arguments.keys()) + list(self._arguments.keys())

    def get_option_values(self):
        """All option values as an ordered mapping of name to value,
        the command first when there is one."""
        if not self._user_asked:
            self.ask_user()
        values = collections.OrderedDict()
        if self.commands:
            values["command"] = self.command
        for option in self.option_names:
            values[option] = self.get(option)
        return values

    def read_config_file(self, path):
        """Read the name and value pairs of every section of an INI file."""
        config = configparser.ConfigParser()
        config.optionxform = str
        try:
            found = config.read(path)
        except configparser.Error as e:
            self.parser.error("Unable to parse the config file {}: {}".format(path, e))
        if not found:
            self.parser.error("Unable to read from the config file: " + path)

        for section in config.sections():
            for name, value in config.items(section):
                yield name, value

    def _config_defaults(self, path):
        known = self.option_names
        defaults = {}
        for name, value in self.read_config_file(path):
            option = re.sub(r'-', '_', kebab(name))
            if option not in known or option == "config":
                self.parser.error("Unknown option `{}' in config file {}.{}".format(
                    name, path, suggestion(option, known)))
            argument = self._user_arguments.get(option) or self._arguments[option]
            if argument.keywords.get("action") == "store_true":
                flag = configparser.ConfigParser.BOOLEAN_STATES.get(value.lower())
                if flag is None:
                    self.parser.error("Option `{}' in config file {} needs a boolean, got `{}'".format(
                        name, path, value))
                value = flag
            defaults[option] = value
        return defaults

    def ask_user(self, override=False, argv=None):
        """Set up and display the command line interface. Store defaults and
        any user input in the Configuration object. The defaults and
        user input are cached; if this method is called again, it does
        nothing and returns the current Configuration object.

        :keyword override: Override the caching behavior.
        :type override: bool

        :keyword argv: The command line arguments to parse. Defaults
          to sys.argv[1:].
        :type argv: list of str

        :returns: self (the current Configuration object)

        """
        if not self.prompt_user:
            for arg_name, arg_values in list(self._user_arguments.items()) + list(self._arguments.items()):
                setattr(self, arg_name, arg_values.keywords.get("default", None))
            self._user_asked = True
            return self

        if self._user_asked and not override:
            return self

        if not getattr(self, "_parser_built", False):
            for arg_name, arg_values in list(self._user_arguments.items()) + list(self._arguments.items()):
                if arg_values.short:
                    self.parser.add_argument(arg_values.short, arg_values.long, **arg_values.keywords)
                else:
                    self.parser.add_argument(arg_values.long, **arg_values.keywords)
            self._parser_built = True

        opts = self.parser.parse_args(args=argv)
        if getattr(opts, "config", None):
            self.parser.set_defaults(**self._config_defaults(opts.config))
            opts = self.parser.parse_args(args=argv)

        if self.commands:
            self.command = opts.command
        for name in self.option_names:
            setattr(self, name, getattr(opts, name))
            logger.debug("Command line argument `%s' = `%s'", name, getattr(opts, name))

        self._user_asked = True
        return self


def build_configuration(prompt_user=True):
    """The :class:`Configuration` of the ``lossyrepair`` command."""
    c = Configuration(
        "Capacity, bandwidth-storage tradeoff and repair reliability of\n"
        "regenerating codes over packet erasure links.\n\n"
        "Numbers may be rationals (3/10) or decimals (0.3, 1e-4). Options\n"
        "that take several values accept comma lists and inclusive\n"
        "start:stop:step ranges, e.g. --p 0.01:0.1:0.01.",
        version=__version__, commands=COMMANDS, prompt_user=prompt_user)
    c.add("n", desc="Number of storage nodes")
    c.add("k", desc="Nodes needed to rebuild the file")
    c.add("d", desc="Complete nodes helping one repair")
    c.add("d1", desc="Helpers the code is built for")
    c.add("d2", desc="Redundant helpers", default="0")
    c.add("dtot", desc="Helpers available to a repair")
    c.add("h", desc="Repairing storage nodes", default="0")
    c.add("M", desc="File size in packets")
    c.add("alpha", desc="Storage per node in packets")
    c.add("beta", desc="Packets each helper delivers")
    c.add("alpha_prime", desc="Storage of each repairing storage node")
    c.add("p", desc="Packet erasure probability; a list or range", default="0")
    c.add("q", desc="Order of the coding field")
    c.add("gamma", desc="Repair bandwidths to evaluate; a list or range\n"
                        "[default: every breakpoint of the tradeoff]")
    c.add("delta", desc="Tolerated probability of a failed repair", default="1e-4")
    c.add("t", desc="Packets each helper transmits")
    c.add("tmin", desc="Smallest t of a psr curve [default: beta]")
    c.add("tmax", desc="Largest t of a psr curve [default: tmin]")
    c.add("t_cap", desc="Largest t the optimizer tries\n[default: 50 * ceil(beta/(1-p))]")
    c.add("trials", desc="Simulated repairs per point; 0 skips the simulation\n"
                         "[default: 100000 for psr, none otherwise]")
    c.add("mode", desc="Code family", default="mbr", choices=["msr", "mbr"])
    c.add("stages", desc="Number of failures to apply")
    c.add("failed", desc="Nodes to fail in turn, e.g. 0,3,1")
    c.add("schedule", desc="JSON file with repair stages and data collector nodes")
    c.add("state", desc="JSON file with a code state from construct or repair")
    c.add("printed_g", action="store_true",
          desc="Evaluate the tradeoff with g(i)=(2d+2k+i+1)i/(2d) for comparison")
    c.add("refresh_repairing", action="store_true",
          desc="Give every repair its own repairing storage node")
    c.add("verify_trials", desc="Simulate each optimized plan this many times")
    c.add("helper_storage", action="store_true",
          desc="Also report the least storage of a repairing node")
    return c


def main(argv=None):
    from . import commands

    config = build_configuration().ask_user(argv=argv)
    sys.exit(commands.run(config))


if __name__ == "__main__":
    main()
