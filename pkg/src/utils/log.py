import logging

PACKAGE_LOGGER = "fracdiff"

# Quiet by default; the command line raises the level with --verbose/--debug
_root = logging.getLogger(PACKAGE_LOGGER)
if not _root.handlers:
    _handler = logging.StreamHandler()
    _handler.setFormatter(logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
    _root.addHandler(_handler)
    _root.setLevel(logging.WARNING)


def get_logger(name=None):
    """Return the package logger or one of its children"""
    if not name:
        return _root
    return _root.getChild(name)


def set_verbosity(verbose=False, debug=False):
    """Adjust the package logger level for a command line run"""
    if debug:
        _root.setLevel(logging.DEBUG)
    elif verbose:
        _root.setLevel(logging.INFO)
    else:
        _root.setLevel(logging.WARNING)
