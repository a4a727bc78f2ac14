"""
optconfig: options read from a config file, overridden by the command line
"""

import configparser
import os
from optparse import OptionParser

from . import errors

OPT_TYPES = ("str", "int", "float")

class _OptionParser(OptionParser):
    def error(self, msg):
        raise errors.UsageError(msg)

class OptConfig(object):
    """ Parses config file, but with option being overridden by command line
    Options are declared with add_option(name, opt_type, default, help),
    opt_type one of 'str', 'int', 'float'.
    Values are looked up in the selected section, then in DEFAULT.
    """
    def __init__(self, usage=None, config_file=None, config_opt="config"):
        """
        If config_opt, the command line can name a different config file ("" ignores the file).
        """
        self.option_parser = _OptionParser(usage=usage)
        self.config_parser = None

        self.config_file = config_file
        self.config_opt = config_opt

        self.opt_types = {}
        self.cfg_defaults = {}
        self.default_section = configparser.DEFAULTSECT

        if config_opt:
            self.add_option(config_opt, help="Configuration file", _internal=True)

    def add_option(self, option, opt_type="str", default=None, help=None, _internal=False):
        """ Add command/config option
        """
        if self.config_parser:
            raise errors.UsageError("Command args already parsed")
        if opt_type not in OPT_TYPES:
            raise errors.UsageError("Invalid option type '%s' for option %s" % (opt_type, option))

        if not _internal and self.config_opt and option == self.config_opt:
            self.config_opt = ""

        self.opt_types[option] = opt_type
        if default is not None:
            if opt_type in ("int", "float") and type(default).__name__ != opt_type:
                raise errors.UsageError("Mismatch between option type '%s' and default value type '%s' for option %s"
                                        % (opt_type, type(default).__name__, option))
            # Raw values are interpolated by configparser
            self.cfg_defaults[option] = str(default).replace("%", "%%")
        self.option_parser.add_option("--" + option, dest=option, default=None,
                                      type=opt_type if opt_type != "str" else "string",
                                      help=(help or None))

    def parse_args(self, args=None):
        """ Parse command line arguments (and read config file), returning argument list.
        """
        (self.cmd_options, cmd_args) = self.option_parser.parse_args(args)

        self.cmd_optvalues = {}
        for option in self.opt_types:
            if getattr(self.cmd_options, option, None) is not None:
                self.cmd_optvalues[option] = getattr(self.cmd_options, option)

        if self.config_opt and getattr(self.cmd_options, self.config_opt, None) is not None:
            self.config_file = getattr(self.cmd_options, self.config_opt)

        self.read_config()
        return cmd_args

    def read_config(self):
        self.config_parser = configparser.ConfigParser(self.cfg_defaults)
        if self.config_file:
            path = os.path.expanduser(self.config_file)
            try:
                self.config_parser.read(path)
            except configparser.Error as excp:
                raise errors.UsageError("Invalid config file %s: %s" % (path, excp))

    def set_section(self, section=None):
        """ Set section, if available. (Call after parsing args)
        """
        if not self.config_parser:
            raise errors.UsageError("Command args not yet parsed")

        if section and self.config_parser.has_section(section):
            self.default_section = section
        else:
            self.default_section = configparser.DEFAULTSECT

    def getopt(self, option, default=None, config_only=False):
        """ Return option value, with command line values overriding any config file values.
        If config_only, ignore command line values.
        """
        if not self.config_parser:
            raise errors.UsageError("Command args not yet parsed")

        section = self.default_section
        value = self.cmd_optvalues.get(option) if not config_only else None
        if value is None:
            # Not on the command line
            if section != configparser.DEFAULTSECT and self.config_parser.has_option(section, option):
                value = self.config_parser.get(section, option)
            elif option in self.config_parser.defaults():
                value = self.config_parser.get(configparser.DEFAULTSECT, option)

            if value is None:
                return default

        opt_type = self.opt_types.get(option)
        if opt_type in ("int", "float"):
            if value == "" and default is not None:
                return default
            try:
                return int(value) if opt_type == "int" else float(value)
            except ValueError as excp:
                raise errors.UsageError("Invalid %s value for option %s=%s in section %s: %s"
                                        % (opt_type, option, value, section, excp))
        return value
