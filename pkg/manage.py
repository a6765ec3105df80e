#!/usr/bin/env python
"""
Command-line entry point of catavp. The optics commands run through Django's
management command runner, e.g.

    python manage.py vp --dir 1,0,1 --rig spherical
    python manage.py sweep --experiment abs-rotation --config noise.ini
"""
import os
import sys


def main(argv=None):
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "catavp.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Django is not installed, install requirements.txt first"
        ) from exc
    execute_from_command_line(argv or sys.argv)


if __name__ == "__main__":
    main()
