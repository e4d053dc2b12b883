#!/usr/bin/env python3
#
# SPDX-License-Identifier: GPL-2.0-only
#

class IwcError(Exception):
    """Base error; exit_code is what the CLI returns for it."""
    exit_code = 1


class ConfigError(IwcError):
    exit_code = 2


class DataError(IwcError):
    exit_code = 3


class NumericError(IwcError):
    exit_code = 4
