# -*- coding: utf-8 -*-
"""Status output. Reports own stdout, so status lines go to stderr."""
import sys
from typing import Optional

from .config import ExpDynConfig, get_config


def say(message: str, config: Optional[ExpDynConfig] = None) -> None:
    """Prints a status line when verbose output is enabled."""
    config = config or get_config()
    if config.runtime.verbose:
        print(message, file=sys.stderr, flush=True)
