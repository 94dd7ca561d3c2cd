"""Pytest wiring: configure Django the way manage.py does before collection."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'polar_qkd.settings')
django.setup()

from polar_qkd.test_runner import LONG_RUN_TAGS  # noqa: E402

collect_ignore = ['examples']


def pytest_addoption(parser):
    parser.addoption('--tag', action='append', default=[],
                     help='run Django-tagged tests (slow, acceptance), as manage.py test --tag does')


def pytest_collection_modifyitems(config, items):
    # Mirror ReconciliationTestRunner: long runs are left out unless a tag is asked for.
    wanted = set(config.getoption('--tag'))
    kept, dropped = [], []
    for item in items:
        obj = getattr(item, 'obj', None)
        cls = getattr(item, 'cls', None)
        tags = set(getattr(obj, 'tags', ())) | set(getattr(cls, 'tags', ()))
        if wanted:
            (kept if tags & wanted else dropped).append(item)
        else:
            (dropped if tags & LONG_RUN_TAGS else kept).append(item)
    if dropped:
        config.hook.pytest_deselected(items=dropped)
        items[:] = kept
