import sys

from .components.command_manager import run


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
