#!/usr/bin/env python3
#
# SPDX-License-Identifier: GPL-2.0-only
#

__all__ = ['SourcePlugin']

import os
import logging

from collections import defaultdict
import importlib
import importlib.util

from iwc import ConfigError

PLUGIN_TYPES = ["source"]

PLUGIN_PATH_ENV = "IWC_PLUGIN_PATH"

logger = logging.getLogger('iwc')

PLUGINS = defaultdict(dict)

class PluginMgr:
    _plugin_dirs = []
    _loaded = set()

    @classmethod
    def get_plugins(cls, ptype):
        """Get dictionary of <plugin_name>:<class> pairs."""
        if ptype not in PLUGIN_TYPES:
            raise ConfigError('%s is not valid plugin type' % ptype)

        # collect plugin directories
        if not cls._plugin_dirs:
            cls._plugin_dirs = [os.path.join(os.path.dirname(__file__), 'plugins')]
            extra = os.environ.get(PLUGIN_PATH_ENV) or ''
            for path in extra.split(os.pathsep):
                if not path:
                    continue
                path = os.path.abspath(os.path.expanduser(path))
                if path not in cls._plugin_dirs and os.path.isdir(path):
                    cls._plugin_dirs.append(path)

        if ptype not in cls._loaded:
            cls._loaded.add(ptype)
            # load all ptype plugins
            for pdir in cls._plugin_dirs:
                ppath = os.path.join(pdir, ptype)
                if os.path.isdir(ppath):
                    for fname in sorted(os.listdir(ppath)):
                        if fname.endswith('.py') and not fname.startswith('_'):
                            mname = fname[:-3]
                            mpath = os.path.join(ppath, fname)
                            logger.debug("loading plugin module %s", mpath)
                            spec = importlib.util.spec_from_file_location(mname, mpath)
                            module = importlib.util.module_from_spec(spec)
                            spec.loader.exec_module(module)

        return PLUGINS.get(ptype, {})

    @classmethod
    def get_source(cls, name):
        plugins = cls.get_plugins("source")
        if name not in plugins:
            raise ConfigError("Unknown signal source '%s' (available: %s)" %
                              (name, ", ".join(sorted(plugins))))
        return plugins[name]

class PluginMeta(type):
    def __new__(cls, name, bases, attrs):
        class_type = type.__new__(cls, name, bases, attrs)
        if 'name' in attrs:
            PLUGINS[class_type.iwc_plugin_type][attrs['name']] = class_type

        return class_type

class SourcePlugin(metaclass=PluginMeta):
    """
    The methods that can be implemented by signal source plugins.

    Any methods not implemented in a subclass inherit these.
    """
    iwc_plugin_type = "source"

    # file extensions picked by default for this source
    extensions = ()

    @classmethod
    def do_read(cls, path, fs=None):
        """
        Called to read the file at path and return an iwc Signal.  fs
        is the sampling rate given on the command line, if any.
        """
        raise ConfigError("Method %s.do_read is not implemented" % cls.__name__)

    @classmethod
    def do_describe(cls, signal):
        """
        Called after a successful read; returns a dict merged into the
        input description of the results file.
        """
        logger.debug("SourcePlugin: do_describe: %d samples", len(signal))
        return {}


def source_for_path(path):
    """Name of the source plugin claiming path's extension, 'csv' otherwise."""
    ext = os.path.splitext(path)[1].lower()
    for name, plugin in sorted(PluginMgr.get_plugins("source").items()):
        if ext in plugin.extensions:
            return name
    return "csv"
