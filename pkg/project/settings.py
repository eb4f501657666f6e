"""
Django settings for the underlap project.

The project has no web surface: Django supplies the settings layer, the
management-command CLI and the audit table. Numerical defaults live at the
bottom of this file; only UNDERLAP_WORKERS is read from the environment.
"""

import os
from pathlib import Path
from decouple import config
# Load environment variables from .env file
from dotenv import load_dotenv
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='underlap-local-only-secret')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'core',
    'density',
    'unl',
    'mi',
    'mixtures',
    'partitions',
    'audit',
]

MIDDLEWARE = []

ROOT_URLCONF = None


# Database (audit trail only)

DATABASES = {
    'default': {
        'ENGINE': config('DATABASE_ENGINE', default='django.db.backends.sqlite3'),
        'NAME': config('DATABASE_NAME', default=str(BASE_DIR / 'underlap.sqlite3')),
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Logging

LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}

# Underlap computation defaults. Only the worker count is read from the environment.

# Worker threads for posterior loops, per-cluster fits and curve grids
UNDERLAP_WORKERS = config('UNDERLAP_WORKERS', default=1, cast=int)

# Importance-sampling draws per UNL estimate (full scale / desk scale)
UNDERLAP_DEFAULT_M = 5000
UNDERLAP_DESK_M = 2000

# Burn-in and retained sweeps under --desk-scale
UNDERLAP_DESK_ITERATIONS = 1000

UNDERLAP_REPORT_SCHEMA_VERSION = '1.0'

# Dense similarity matrices are not written above this many observations
UNDERLAP_MAX_PSM_EXPORT = 5000

# Keep BLAS single-threaded unless the caller asks otherwise; parallelism is
# handled by the worker pools above.
os.environ.setdefault('OPENBLAS_NUM_THREADS', '1')
