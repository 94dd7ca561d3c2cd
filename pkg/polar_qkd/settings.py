"""
Django settings for polar_qkd project.

The project has no web front end: Django hosts the management commands
(construct, bench, sweep, reconcile_serve, reconcile_connect, keyrate), the
logging configuration and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.0/ref/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals (signing); nothing here is served.
SECRET_KEY = os.environ.get('POLAR_QKD_SECRET_KEY', 'polar-qkd-offline-tooling-key')

DEBUG = False

ALLOWED_HOSTS: list[str] = []


# Application definition

INSTALLED_APPS = [
    'reconciliation',
]

# No models: the commands and tests never touch a database.
DATABASES: dict = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Run defaults for the reconciliation commands

POLAR_QKD = {
    'OUTPUT_DIR': BASE_DIR / 'output',
    'CODE_TABLE_DIR': BASE_DIR / 'code_tables',
    'DEFAULT_SEED': 2013,
    'TARGET_FER': 0.1,
    'DE_BINS': 2048,
    'DE_LLR_MAX': 30.0,
    'REPRESENTATION': 'fixed',
    # (largest n, trials) pairs, first match wins
    'TRIALS': ((20, 500), (24, 100), (27, 30)),
    'LISTEN_ADDRESS': '127.0.0.1:7474',
}


# Logging: no per-line timestamps, commands print a single timestamped header.

LOG_LEVEL = os.environ.get('POLAR_QKD_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'reconciliation': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

TEST_RUNNER = 'polar_qkd.test_runner.ReconciliationTestRunner'
